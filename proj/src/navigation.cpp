#include "sagr/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

namespace sagr {

std::optional<std::vector<GridPoint>> plan_path(GridPoint from, GridPoint to,
                                                const ObservedMap& observed) {
    const SemanticGrid& g = observed.grid;
    if (!g.in_bounds(from) || !g.in_bounds(to)) return std::nullopt;
    int start = g.index(from), goal = g.index(to);
    if (!g.is_free(start) || !g.is_free(goal)) return std::nullopt;
    if (start == goal) return std::vector<GridPoint>{from};

    auto manhattan = [&](int idx) {
        GridPoint p = g.point(idx);
        return std::abs(p.x - to.x) + std::abs(p.y - to.y);
    };

    struct Entry {
        int f;
        int idx;
        bool operator>(const Entry& o) const { return f != o.f ? f > o.f : idx > o.idx; }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::vector<int> gscore(static_cast<std::size_t>(g.size()), -1);
    std::vector<int> parent(static_cast<std::size_t>(g.size()), -1);
    gscore[static_cast<std::size_t>(start)] = 0;
    open.push({manhattan(start), start});

    while (!open.empty()) {
        auto [f, cur] = open.top();
        open.pop();
        if (f > gscore[static_cast<std::size_t>(cur)] + manhattan(cur)) continue;  // stale entry
        if (cur == goal) break;
        GridPoint p = g.point(cur);
        for (int k = 0; k < 4; ++k) {
            int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
            if (!g.in_bounds(nx, ny)) continue;
            int ni = g.index(nx, ny);
            if (!g.is_free(ni)) continue;
            int ng = gscore[static_cast<std::size_t>(cur)] + 1;
            if (gscore[static_cast<std::size_t>(ni)] >= 0 && gscore[static_cast<std::size_t>(ni)] <= ng) continue;
            gscore[static_cast<std::size_t>(ni)] = ng;
            parent[static_cast<std::size_t>(ni)] = cur;
            open.push({ng + manhattan(ni), ni});
        }
    }
    if (gscore[static_cast<std::size_t>(goal)] < 0) return std::nullopt;

    std::vector<GridPoint> path;
    for (int cur = goal; cur >= 0; cur = parent[static_cast<std::size_t>(cur)]) path.push_back(g.point(cur));
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<int> bfs_distances(GridPoint from, const ObservedMap& observed) {
    const SemanticGrid& g = observed.grid;
    std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
    if (!g.in_bounds(from) || !g.is_free(g.index(from))) return dist;
    std::deque<int> q{g.index(from)};
    dist[static_cast<std::size_t>(g.index(from))] = 0;
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        GridPoint p = g.point(cur);
        for (int k = 0; k < 4; ++k) {
            int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
            if (!g.in_bounds(nx, ny)) continue;
            int ni = g.index(nx, ny);
            if (dist[static_cast<std::size_t>(ni)] >= 0 || !g.is_free(ni)) continue;
            dist[static_cast<std::size_t>(ni)] = dist[static_cast<std::size_t>(cur)] + 1;
            q.push_back(ni);
        }
    }
    return dist;
}

void step_robots(std::vector<RobotState>& robots, const ObservedMap& observed, double d_safe) {
    (void)observed;
    for (RobotState& r : robots) {
        bool truncated = false;
        int moved = 0;
        while (moved < r.v_max && r.has_active_path()) {
            GridPoint next = r.path[r.path_pos + 1];
            bool safe = true;
            for (const RobotState& other : robots) {
                if (other.id == r.id) continue;
                if (euclidean(next, other.pose.point()) < d_safe - 1e-9) {
                    safe = false;
                    break;
                }
            }
            if (!safe) {
                truncated = true;
                break;
            }
            GridPoint prev = r.pose.point();
            r.path_pos += 1;
            r.pose.x = next.x;
            r.pose.y = next.y;
            if (next.x != prev.x || next.y != prev.y)
                r.pose.theta = std::atan2(static_cast<double>(next.y - prev.y),
                                          static_cast<double>(next.x - prev.x));
            ++moved;
        }
        if (truncated && moved == 0) {
            r.status = RobotStatus::Blocked;
            r.blocked_steps += 1;
        } else if (r.has_active_path()) {
            r.status = RobotStatus::Navigating;
            r.blocked_steps = 0;
        } else if (!r.waypoint_queue.empty() || moved > 0) {
            r.status = RobotStatus::Navigating;
            r.blocked_steps = 0;
        } else {
            r.status = RobotStatus::Idle;
            r.blocked_steps = 0;
        }
    }
}

std::optional<std::size_t> nearest_reachable_frontier(const Pose& pose, const ObservedMap& observed,
                                                      const std::vector<FrontierCluster>& clusters) {
    if (clusters.empty()) return std::nullopt;
    std::vector<int> dist = bfs_distances(pose.point(), observed);
    std::optional<std::size_t> best;
    int best_d = -1;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        int d = dist[static_cast<std::size_t>(clusters[i].rep)];
        if (d < 0) continue;
        if (!best || d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

}  // namespace sagr
