#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sagr/frontier.hpp"
#include "sagr/scene.hpp"

namespace sagr {

// One 4-connected component of same-label observed free cells.
struct RoomNode {
    std::string id;          // stable across cycles, "R<n>"
    LabelId type = kNoLabel;
    std::vector<int> cells;  // ascending cell indices
    std::vector<int> frontier_clusters;  // indices into the cycle's cluster list
    int frontier_cell_total = 0;         // sum of member cluster sizes
    std::vector<int> robots;             // robot ids currently inside
    std::vector<std::string> neighbors;  // adjacent room ids, sorted
};

// Semantic area graph rebuilt each coordination cycle. Nodes are room
// instances, edges 4-adjacency between instances; frontier-less rooms are
// pruned as fully explored.
struct AreaGraph {
    std::map<std::string, RoomNode> nodes;
    std::set<std::pair<std::string, std::string>> edges;  // normalized (lo, hi) id pairs
    int cycle = 0;
    int next_fresh_id = 0;  // carried forward so ids are never reused

    bool empty() const { return nodes.empty(); }
    // Room id owning `cell`, empty string when the cell belongs to no node.
    std::string room_of_cell(int cell) const;
};

struct SerializeOptions {
    bool include_neighbors = true;  // false mirrors the no-neighborhood-context ablation
};

// Components of same-label observed free cells, without ids/edges/frontiers.
// Deterministic order: by lowest member cell index.
std::vector<RoomNode> extract_room_instances(const ObservedMap& observed);

// Edge (vi, vj) iff some cell of vi is 4-adjacent to some cell of vj.
std::set<std::pair<int, int>> build_edges(const std::vector<RoomNode>& nodes,
                                          const SemanticGrid& grid);

// Inherit ids from the previous graph by maximal cell overlap (ties: larger
// previous node, then lexicographic id); unmatched nodes get fresh sequential
// ids starting at prev.next_fresh_id.
void assign_room_ids(std::vector<RoomNode>& nodes, const AreaGraph* previous, int& next_fresh_id);

// Drop nodes with no associated frontier clusters, plus incident edges.
void prune_explored(AreaGraph& graph);

// Sets each cluster's room_id to the id of the node containing its
// representative; clusters whose representative is unlabeled keep none.
void associate_rooms(std::vector<FrontierCluster>& clusters, const AreaGraph& graph);

// Full per-cycle build: components -> stable ids -> edges -> robot occupancy
// -> frontier association -> pruning.
AreaGraph build_area_graph(const ObservedMap& observed, std::vector<FrontierCluster>& clusters,
                           const std::vector<Pose>& robot_poses, const AreaGraph* previous,
                           int cycle);

// Deterministic line-oriented text for the planner prompt (header
// "AREA-GRAPH v1"). Robots standing on unlabeled cells are listed on a
// trailing unassigned_robots line.
std::string serialize(const AreaGraph& graph, const LabelSet& labels,
                      const std::vector<Pose>& robot_poses, const SerializeOptions& options = {});

}  // namespace sagr
