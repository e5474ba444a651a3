#include "sagr/areagraph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace sagr {

namespace {

// Numeric suffix of "R<n>" ids for human-friendly ordering; falls back to -1.
long id_number(const std::string& id) {
    if (id.size() < 2 || id[0] != 'R') return -1;
    long v = 0;
    for (std::size_t i = 1; i < id.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return -1;
        v = v * 10 + (id[i] - '0');
    }
    return v;
}

bool id_less(const std::string& a, const std::string& b) {
    long na = id_number(a), nb = id_number(b);
    if (na >= 0 && nb >= 0 && na != nb) return na < nb;
    return a < b;
}

}  // namespace

std::string AreaGraph::room_of_cell(int cell) const {
    for (const auto& [id, node] : nodes)
        if (std::binary_search(node.cells.begin(), node.cells.end(), cell)) return id;
    return {};
}

std::vector<RoomNode> extract_room_instances(const ObservedMap& observed) {
    const SemanticGrid& g = observed.grid;
    std::vector<int> comp(static_cast<std::size_t>(g.size()), -1);
    std::vector<RoomNode> nodes;

    for (int i = 0; i < g.size(); ++i) {
        const Cell& c = g.at_index(i);
        if (c.occ != Occupancy::Free || c.label == kNoLabel || comp[static_cast<std::size_t>(i)] >= 0)
            continue;
        int id = static_cast<int>(nodes.size());
        RoomNode node;
        node.type = c.label;
        std::deque<int> q{i};
        comp[static_cast<std::size_t>(i)] = id;
        while (!q.empty()) {
            int cur = q.front();
            q.pop_front();
            node.cells.push_back(cur);
            GridPoint p = g.point(cur);
            for (int k = 0; k < 4; ++k) {
                int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
                if (!g.in_bounds(nx, ny)) continue;
                int ni = g.index(nx, ny);
                if (comp[static_cast<std::size_t>(ni)] >= 0) continue;
                const Cell& nc = g.at_index(ni);
                if (nc.occ != Occupancy::Free || nc.label != c.label) continue;
                comp[static_cast<std::size_t>(ni)] = id;
                q.push_back(ni);
            }
        }
        std::sort(node.cells.begin(), node.cells.end());
        nodes.push_back(std::move(node));
    }
    return nodes;
}

std::set<std::pair<int, int>> build_edges(const std::vector<RoomNode>& nodes,
                                          const SemanticGrid& grid) {
    std::vector<int> owner(static_cast<std::size_t>(grid.size()), -1);
    for (std::size_t n = 0; n < nodes.size(); ++n)
        for (int c : nodes[n].cells) owner[static_cast<std::size_t>(c)] = static_cast<int>(n);

    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < grid.size(); ++i) {
        int a = owner[static_cast<std::size_t>(i)];
        if (a < 0) continue;
        GridPoint p = grid.point(i);
        // Right and down neighbors cover every unordered adjacent pair once.
        for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
            if (!grid.in_bounds(p.x + dx, p.y + dy)) continue;
            int b = owner[static_cast<std::size_t>(grid.index(p.x + dx, p.y + dy))];
            if (b >= 0 && b != a) edges.insert({std::min(a, b), std::max(a, b)});
        }
    }
    return edges;
}

void assign_room_ids(std::vector<RoomNode>& nodes, const AreaGraph* previous, int& next_fresh_id) {
    struct Claim {
        int overlap;
        int prev_size;
        std::string prev_id;
        std::size_t node_index;
    };
    std::vector<Claim> claims;
    if (previous) {
        for (const auto& [pid, pnode] : previous->nodes) {
            std::set<int> pcells(pnode.cells.begin(), pnode.cells.end());
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                int overlap = 0;
                for (int c : nodes[n].cells)
                    if (pcells.count(c)) ++overlap;
                if (overlap > 0)
                    claims.push_back({overlap, static_cast<int>(pnode.cells.size()), pid, n});
            }
        }
    }
    std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.prev_size != b.prev_size) return a.prev_size > b.prev_size;
        if (a.prev_id != b.prev_id) return a.prev_id < b.prev_id;
        return a.node_index < b.node_index;
    });

    std::set<std::string> used;
    for (const Claim& c : claims) {
        if (!nodes[c.node_index].id.empty() || used.count(c.prev_id)) continue;
        nodes[c.node_index].id = c.prev_id;
        used.insert(c.prev_id);
    }
    for (RoomNode& n : nodes)
        if (n.id.empty()) n.id = "R" + std::to_string(next_fresh_id++);
}

void prune_explored(AreaGraph& graph) {
    for (auto it = graph.nodes.begin(); it != graph.nodes.end();) {
        if (it->second.frontier_clusters.empty()) it = graph.nodes.erase(it);
        else ++it;
    }
    for (auto it = graph.edges.begin(); it != graph.edges.end();) {
        if (!graph.nodes.count(it->first) || !graph.nodes.count(it->second)) it = graph.edges.erase(it);
        else ++it;
    }
    for (auto& [id, node] : graph.nodes) {
        std::erase_if(node.neighbors, [&](const std::string& n) { return !graph.nodes.count(n); });
    }
}

void associate_rooms(std::vector<FrontierCluster>& clusters, const AreaGraph& graph) {
    for (FrontierCluster& c : clusters) {
        std::string room = graph.room_of_cell(c.rep);
        c.room_id = room.empty() ? std::nullopt : std::optional<std::string>(room);
    }
}

AreaGraph build_area_graph(const ObservedMap& observed, std::vector<FrontierCluster>& clusters,
                           const std::vector<Pose>& robot_poses, const AreaGraph* previous,
                           int cycle) {
    std::vector<RoomNode> nodes = extract_room_instances(observed);
    int next_fresh_id = previous ? previous->next_fresh_id : 0;
    assign_room_ids(nodes, previous, next_fresh_id);

    auto index_edges = build_edges(nodes, observed.grid);

    AreaGraph graph;
    graph.cycle = cycle;
    graph.next_fresh_id = next_fresh_id;
    for (auto& [i, j] : index_edges) {
        const std::string &a = nodes[static_cast<std::size_t>(i)].id, &b = nodes[static_cast<std::size_t>(j)].id;
        graph.edges.insert({std::min(a, b), std::max(a, b)});
        nodes[static_cast<std::size_t>(i)].neighbors.push_back(b);
        nodes[static_cast<std::size_t>(j)].neighbors.push_back(a);
    }
    for (RoomNode& n : nodes) std::sort(n.neighbors.begin(), n.neighbors.end(), id_less);

    for (std::size_t r = 0; r < robot_poses.size(); ++r) {
        int cell = observed.grid.index(robot_poses[r].point());
        for (RoomNode& n : nodes)
            if (std::binary_search(n.cells.begin(), n.cells.end(), cell)) {
                n.robots.push_back(static_cast<int>(r));
                break;
            }
    }

    for (RoomNode& n : nodes) graph.nodes.emplace(n.id, std::move(n));

    associate_rooms(clusters, graph);
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        if (!clusters[ci].room_id) continue;
        auto it = graph.nodes.find(*clusters[ci].room_id);
        if (it == graph.nodes.end()) continue;
        it->second.frontier_clusters.push_back(static_cast<int>(ci));
        it->second.frontier_cell_total += clusters[ci].size;
    }

    prune_explored(graph);
    return graph;
}

std::string serialize(const AreaGraph& graph, const LabelSet& labels,
                      const std::vector<Pose>& robot_poses, const SerializeOptions& options) {
    std::ostringstream out;
    out << "AREA-GRAPH v1 cycle=" << graph.cycle << " rooms=" << graph.nodes.size() << '\n';
    if (graph.nodes.empty()) {
        out << "no rooms discovered\n";
        return out.str();
    }

    std::vector<const RoomNode*> ordered;
    for (const auto& [id, node] : graph.nodes) ordered.push_back(&node);
    std::sort(ordered.begin(), ordered.end(),
              [](const RoomNode* a, const RoomNode* b) { return id_less(a->id, b->id); });

    std::set<int> placed;
    for (const RoomNode* n : ordered) {
        out << n->id << ' ' << (n->type == kNoLabel ? "unlabeled" : labels.name(n->type))
            << " frontiers=" << n->frontier_clusters.size() << " fcells=" << n->frontier_cell_total
            << " robots=[";
        for (std::size_t i = 0; i < n->robots.size(); ++i) {
            out << (i ? "," : "") << n->robots[i];
            placed.insert(n->robots[i]);
        }
        out << ']';
        if (options.include_neighbors) {
            out << " adj=[";
            for (std::size_t i = 0; i < n->neighbors.size(); ++i) out << (i ? "," : "") << n->neighbors[i];
            out << ']';
        }
        out << '\n';
    }

    std::vector<int> unassigned;
    for (std::size_t r = 0; r < robot_poses.size(); ++r)
        if (!placed.count(static_cast<int>(r))) unassigned.push_back(static_cast<int>(r));
    if (!unassigned.empty()) {
        out << "unassigned_robots=[";
        for (std::size_t i = 0; i < unassigned.size(); ++i) out << (i ? "," : "") << unassigned[i];
        out << "]\n";
    }
    return out.str();
}

}  // namespace sagr
