#include "sagr/allocation.hpp"

#include <algorithm>
#include <limits>

namespace sagr {

namespace {

// Jonker-Volgenant style shortest augmenting path solver on a square matrix.
// Scans columns in ascending order with strict improvement, so equal-cost
// alternatives resolve toward lower indices.
std::vector<int> solve_square(const std::vector<double>& a, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            int i0 = p[static_cast<std::size_t>(j0)], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = a[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[static_cast<std::size_t>(i0)] -
                             v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] > 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian_match(const CostMatrix& cost) {
    if (cost.rows <= 0 || cost.cols <= 0) return {};
    const int n = std::max(cost.rows, cost.cols);
    // Dummy rows/cols cost 0 everywhere, which leaves the real sub-assignment optimal.
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < cost.rows; ++r)
        for (int c = 0; c < cost.cols; ++c) a[static_cast<std::size_t>(r) * n + c] = cost.at(r, c);

    std::vector<int> row_to_col = solve_square(a, n);
    std::vector<std::pair<int, int>> match;
    for (int r = 0; r < cost.rows; ++r)
        if (row_to_col[static_cast<std::size_t>(r)] < cost.cols) match.push_back({r, row_to_col[static_cast<std::size_t>(r)]});
    return match;
}

double matching_cost(const CostMatrix& cost, const std::vector<std::pair<int, int>>& match) {
    double total = 0.0;
    for (auto [r, c] : match) total += cost.at(r, c);
    return total;
}

std::vector<std::vector<int>> iterative_allocate(const std::vector<GridPoint>& robot_positions,
                                                 const std::vector<GridPoint>& waypoints) {
    std::vector<std::vector<int>> out(robot_positions.size());
    if (robot_positions.empty()) return out;

    std::vector<GridPoint> anchors = robot_positions;
    std::vector<int> remaining(waypoints.size());
    for (std::size_t i = 0; i < waypoints.size(); ++i) remaining[i] = static_cast<int>(i);

    while (!remaining.empty()) {
        CostMatrix cost(static_cast<int>(anchors.size()), static_cast<int>(remaining.size()));
        for (int r = 0; r < cost.rows; ++r)
            for (int c = 0; c < cost.cols; ++c)
                cost.at(r, c) = euclidean(anchors[static_cast<std::size_t>(r)],
                                          waypoints[static_cast<std::size_t>(remaining[static_cast<std::size_t>(c)])]);
        auto match = hungarian_match(cost);
        std::vector<int> taken;
        for (auto [r, c] : match) {
            int w = remaining[static_cast<std::size_t>(c)];
            out[static_cast<std::size_t>(r)].push_back(w);
            anchors[static_cast<std::size_t>(r)] = waypoints[static_cast<std::size_t>(w)];
            taken.push_back(c);
        }
        std::sort(taken.rbegin(), taken.rend());
        for (int c : taken) remaining.erase(remaining.begin() + c);
    }
    return out;
}

double path_length(const GridPoint& start, const std::vector<GridPoint>& waypoints) {
    double len = 0.0;
    GridPoint prev = start;
    for (const GridPoint& w : waypoints) {
        len += euclidean(prev, w);
        prev = w;
    }
    return len;
}

namespace {

double order_length(const GridPoint& start, const std::vector<GridPoint>& pts,
                    const std::vector<std::size_t>& order) {
    double len = 0.0;
    GridPoint prev = start;
    for (std::size_t i : order) {
        len += euclidean(prev, pts[i]);
        prev = pts[i];
    }
    return len;
}

// First-improvement 2-opt sweeps (segment reversal on the open path).
std::vector<std::size_t> two_opt(const GridPoint& start, const std::vector<GridPoint>& pts,
                                 std::vector<std::size_t> order) {
    const std::size_t n = order.size();
    if (n < 2) return order;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < n - 1 && !improved; ++i) {
            GridPoint before = i == 0 ? start : pts[order[i - 1]];
            for (std::size_t k = i + 1; k < n && !improved; ++k) {
                double removed = euclidean(before, pts[order[i]]);
                double added = euclidean(before, pts[order[k]]);
                if (k + 1 < n) {
                    removed += euclidean(pts[order[k]], pts[order[k + 1]]);
                    added += euclidean(pts[order[i]], pts[order[k + 1]]);
                }
                if (added + 1e-12 < removed) {
                    std::reverse(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(k) + 1);
                    improved = true;
                }
            }
        }
    }
    return order;
}

}  // namespace

std::vector<std::size_t> tsp_order_indices(const GridPoint& start,
                                           const std::vector<GridPoint>& waypoints) {
    std::vector<std::size_t> identity(waypoints.size());
    for (std::size_t i = 0; i < waypoints.size(); ++i) identity[i] = i;
    if (waypoints.size() <= 1) return identity;

    // Nearest-neighbor chain from the start, ties toward lower input index.
    std::vector<char> used(waypoints.size(), 0);
    std::vector<std::size_t> nn;
    GridPoint cur = start;
    for (std::size_t step = 0; step < waypoints.size(); ++step) {
        std::size_t best = waypoints.size();
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < waypoints.size(); ++i) {
            if (used[i]) continue;
            double d = euclidean(cur, waypoints[i]);
            if (d < best_d - 1e-12) {
                best_d = d;
                best = i;
            }
        }
        used[best] = 1;
        nn.push_back(best);
        cur = waypoints[best];
    }

    // Descend from the nearest-neighbor tour and from the caller's order;
    // keeping the better of the two guarantees the result is never longer
    // than the input order.
    std::vector<std::size_t> a = two_opt(start, waypoints, std::move(nn));
    std::vector<std::size_t> b = two_opt(start, waypoints, identity);
    return order_length(start, waypoints, b) + 1e-12 < order_length(start, waypoints, a) ? b : a;
}

std::vector<GridPoint> tsp_order(const GridPoint& start, const std::vector<GridPoint>& waypoints) {
    std::vector<GridPoint> out;
    out.reserve(waypoints.size());
    for (std::size_t i : tsp_order_indices(start, waypoints)) out.push_back(waypoints[i]);
    return out;
}

}  // namespace sagr
