#pragma once

#include <vector>

#include "sagr/grid.hpp"

namespace sagr {

struct SensorConfig {
    int d_det = 10;                 // max range, cells
    double theta_det = M_PI / 2.0;  // angular FoV, radians, (0, 2pi]
    int rays = 180;                 // rays per sweep

    bool valid() const { return d_det >= 1 && theta_det > 0.0 && theta_det <= 2.0 * M_PI + 1e-9 && rays >= 8; }
};

// Team-shared observed map. Starts all-Unknown; cells only ever transition
// Unknown -> Free/Occupied and always match ground truth (noise-free sensing).
struct ObservedMap {
    SemanticGrid grid;
    int revealed_count = 0;

    ObservedMap() = default;
    explicit ObservedMap(const SemanticGrid& truth)
        : grid(truth.width, truth.height, truth.resolution) {}

    bool is_known(int idx) const { return grid.occ(idx) != Occupancy::Unknown; }
};

// Casts `cfg.rays` Bresenham rays across the FoV window; a traversed cell is
// revealed only if its own straight-line Bresenham sight to the pose crosses no
// occupied truth cell, and each ray stops at the first occupied cell it hits.
// Returns newly revealed cell indices in ascending order.
std::vector<int> sense(const Pose& pose, const SemanticGrid& truth, ObservedMap& observed,
                       const SensorConfig& cfg);

// True when `cell` is visible from `pose`: within range, and the Bresenham
// segment between them holds no occupied cell strictly before `cell`.
// Shared by sense() and the brute-force test oracle path.
bool line_of_sight(const SemanticGrid& truth, GridPoint pose, GridPoint cell);

}  // namespace sagr
