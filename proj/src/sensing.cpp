#include "sagr/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace sagr {

bool line_of_sight(const SemanticGrid& truth, GridPoint pose, GridPoint cell) {
    std::vector<GridPoint> line = bresenham_line(pose, cell);
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
        if (truth.at(line[i].x, line[i].y).occ == Occupancy::Occupied && !(line[i] == pose)) return false;
    return true;
}

std::vector<int> sense(const Pose& pose, const SemanticGrid& truth, ObservedMap& observed,
                       const SensorConfig& cfg) {
    const GridPoint origin = pose.point();
    std::vector<int> newly;
    if (!truth.in_bounds(origin)) return newly;

    // Visibility memo for this sweep: 0 unknown, 1 visible, 2 blocked.
    std::vector<std::uint8_t> memo(static_cast<std::size_t>(truth.size()), 0);
    auto visible = [&](GridPoint p) {
        std::uint8_t& m = memo[static_cast<std::size_t>(truth.index(p))];
        if (m == 0) m = line_of_sight(truth, origin, p) ? 1 : 2;
        return m == 1;
    };
    auto reveal = [&](GridPoint p) {
        int idx = truth.index(p);
        Cell& obs = observed.grid.at_index(idx);
        if (obs.occ != Occupancy::Unknown) return;
        const Cell& gt = truth.at_index(idx);
        if (gt.occ == Occupancy::Unknown) return;  // holes outside the scene carry no information
        obs = gt;
        observed.revealed_count += 1;
        newly.push_back(idx);
    };

    const bool full_circle = cfg.theta_det >= 2.0 * M_PI - 1e-9;
    const double start = pose.theta - cfg.theta_det / 2.0;
    const double step = full_circle ? cfg.theta_det / cfg.rays
                                    : cfg.theta_det / (cfg.rays - 1);
    const double range = static_cast<double>(cfg.d_det);

    for (int k = 0; k < cfg.rays; ++k) {
        double a = start + step * k;
        GridPoint end{origin.x + static_cast<int>(std::lround(range * std::cos(a))),
                      origin.y + static_cast<int>(std::lround(range * std::sin(a)))};
        for (const GridPoint& p : bresenham_line(origin, end)) {
            if (!truth.in_bounds(p)) break;
            if (euclidean(origin, p) > range + 1e-9) break;
            if (visible(p)) reveal(p);
            if (truth.at(p.x, p.y).occ == Occupancy::Occupied) break;
        }
    }

    std::sort(newly.begin(), newly.end());
    return newly;
}

}  // namespace sagr
