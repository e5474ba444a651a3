#pragma once

#include <utility>
#include <vector>

#include "sagr/grid.hpp"

namespace sagr {

// Robots x frontier representatives, straight-line distances in cells.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> entries;  // row-major

    CostMatrix() = default;
    CostMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return entries[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return entries[static_cast<std::size_t>(r) * cols + c]; }
};

// Minimum-total-cost bipartite matching of size min(rows, cols).
// Rectangular matrices are padded internally. Returns (row, col) pairs
// sorted by row; deterministic for a given matrix.
std::vector<std::pair<int, int>> hungarian_match(const CostMatrix& cost);

double matching_cost(const CostMatrix& cost, const std::vector<std::pair<int, int>>& match);

// Repeated Hungarian rounds distributing every waypoint to exactly one robot;
// after each round a robot's cost anchor moves to its last assigned waypoint.
// Returns, per robot, waypoint indices in assignment order.
std::vector<std::vector<int>> iterative_allocate(const std::vector<GridPoint>& robot_positions,
                                                 const std::vector<GridPoint>& waypoints);

// Open-path ordering from `start`: nearest-neighbor construction then 2-opt
// descent; never longer than the input order.
std::vector<GridPoint> tsp_order(const GridPoint& start, const std::vector<GridPoint>& waypoints);

// Same ordering, returned as a permutation of input positions.
std::vector<std::size_t> tsp_order_indices(const GridPoint& start,
                                           const std::vector<GridPoint>& waypoints);

double path_length(const GridPoint& start, const std::vector<GridPoint>& waypoints);

}  // namespace sagr
