#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sagr/sensing.hpp"

namespace sagr {

// Grouped frontier cells with a representative waypoint; the navigation
// target handed to the allocation layer.
struct FrontierCluster {
    std::vector<int> cells;  // ascending cell indices, each a frontier at build time
    int rep = -1;            // centroid projected to the nearest reachable free cell
    int size = 0;            // |cells|
    std::optional<std::string> room_id;  // filled by room association; none if rep unlabeled
};

// Exactly { g : o(g)=Free and some 4-neighbor is Unknown }, ascending.
std::vector<int> detect_frontiers(const ObservedMap& observed);

// Partitions the frontier set: repeatedly seed at the lowest remaining index,
// BFS over observed free space up to c_max hops, and absorb every frontier
// cell reached. Representatives are filled in; degenerate clusters whose
// centroid projection fails are discarded.
std::vector<FrontierCluster> cluster_frontiers(const std::vector<int>& frontiers,
                                               const ObservedMap& observed, int c_max);

// Observed-free cell nearest to the arithmetic centroid of `cells`
// (Euclidean, ties by lowest index), restricted to cells reachable from the
// cluster through observed free space. Throws NoReachableFreeCell.
int representative_waypoint(const std::vector<int>& cells, const ObservedMap& observed);

}  // namespace sagr
