#include "sagr/frontier.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "sagr/errors.hpp"

namespace sagr {

std::vector<int> detect_frontiers(const ObservedMap& observed) {
    const SemanticGrid& g = observed.grid;
    std::vector<int> out;
    for (int i = 0; i < g.size(); ++i) {
        if (!g.is_free(i)) continue;
        GridPoint p = g.point(i);
        for (int k = 0; k < 4; ++k) {
            int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
            if (g.in_bounds(nx, ny) && g.at(nx, ny).occ == Occupancy::Unknown) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

std::vector<FrontierCluster> cluster_frontiers(const std::vector<int>& frontiers,
                                               const ObservedMap& observed, int c_max) {
    const SemanticGrid& g = observed.grid;
    std::set<int> remaining(frontiers.begin(), frontiers.end());
    std::vector<FrontierCluster> clusters;

    while (!remaining.empty()) {
        int seed = *remaining.begin();
        // BFS over observed free cells, hop distance capped at c_max.
        std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
        std::deque<int> q{seed};
        dist[static_cast<std::size_t>(seed)] = 0;
        std::vector<int> members;
        while (!q.empty()) {
            int cur = q.front();
            q.pop_front();
            if (remaining.count(cur)) members.push_back(cur);
            if (dist[static_cast<std::size_t>(cur)] == c_max) continue;
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
        std::sort(members.begin(), members.end());
        for (int m : members) remaining.erase(m);

        FrontierCluster c;
        c.cells = std::move(members);
        c.size = static_cast<int>(c.cells.size());
        try {
            c.rep = representative_waypoint(c.cells, observed);
        } catch (const NoReachableFreeCell&) {
            continue;  // degenerate cluster, discard
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

int representative_waypoint(const std::vector<int>& cells, const ObservedMap& observed) {
    if (cells.empty()) throw NoReachableFreeCell("representative_waypoint: empty cluster");
    const SemanticGrid& g = observed.grid;

    double cx = 0.0, cy = 0.0;
    for (int idx : cells) {
        GridPoint p = g.point(idx);
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(cells.size());
    cy /= static_cast<double>(cells.size());

    // Multi-source BFS from the cluster over observed free space.
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    std::deque<int> q;
    for (int idx : cells) {
        if (!g.is_free(idx) || seen[static_cast<std::size_t>(idx)]) continue;
        seen[static_cast<std::size_t>(idx)] = 1;
        q.push_back(idx);
    }
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        GridPoint p = g.point(cur);
        double d = std::hypot(p.x - cx, p.y - cy);
        if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && cur < best)) {
            best_d = d;
            best = cur;
        }
        for (int k = 0; k < 4; ++k) {
            int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
            if (!g.in_bounds(nx, ny)) continue;
            int ni = g.index(nx, ny);
            if (seen[static_cast<std::size_t>(ni)] || !g.is_free(ni)) continue;
            seen[static_cast<std::size_t>(ni)] = 1;
            q.push_back(ni);
        }
    }
    if (best < 0) throw NoReachableFreeCell("representative_waypoint: no reachable free cell");
    return best;
}

}  // namespace sagr
