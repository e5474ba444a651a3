#include "sagr/scene.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sagr {

std::vector<std::string> default_label_names() {
    return {"bedroom", "kitchen", "bathroom", "living_room", "hallway", "closet"};
}

std::string task_name(Task t) { return t == Task::Explore ? "explore" : "search"; }

Task task_from_name(const std::string& name) {
    if (name == "explore") return Task::Explore;
    if (name == "search") return Task::Search;
    throw ConfigError("unknown task: " + name);
}

std::vector<int> SceneSpec::accessible_free_cells() const {
    std::vector<int> out;
    for (int i = 0; i < grid.size(); ++i)
        if (grid.is_free(i) && !inaccessible.count(i)) out.push_back(i);
    return out;
}

int SceneSpec::coverage_denominator() const {
    int n = 0;
    for (int i = 0; i < grid.size(); ++i)
        if (grid.occ(i) != Occupancy::Unknown && !inaccessible.count(i)) ++n;
    return n;
}

namespace {

// Flood fill over free cells, 4-connected.
std::vector<int> flood_free(const SemanticGrid& g, int start, const std::set<int>& blocked) {
    std::vector<int> visited;
    if (!g.is_free(start) || blocked.count(start)) return visited;
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    std::deque<int> q{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        visited.push_back(cur);
        GridPoint p = g.point(cur);
        for (int k = 0; k < 4; ++k) {
            int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
            if (!g.in_bounds(nx, ny)) continue;
            int ni = g.index(nx, ny);
            if (seen[static_cast<std::size_t>(ni)] || !g.is_free(ni) || blocked.count(ni)) continue;
            seen[static_cast<std::size_t>(ni)] = 1;
            q.push_back(ni);
        }
    }
    return visited;
}

char legend_char_for(const std::string& label, const std::string& used) {
    for (char c : label) {
        char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (std::isalpha(static_cast<unsigned char>(lc)) && used.find(lc) == std::string::npos) return lc;
    }
    for (char c = 'a'; c <= 'z'; ++c)
        if (used.find(c) == std::string::npos) return c;
    throw ValidationError("legend exhausted: more than 26 labels");
}

}  // namespace

void validate_scene(const SceneSpec& scene) {
    const SemanticGrid& g = scene.grid;
    if (g.width <= 0 || g.height <= 0) throw ValidationError("scene: empty grid");
    if (!(g.resolution > 0.0)) throw ValidationError("scene: resolution must be > 0");
    if (static_cast<int>(g.cells.size()) != g.size()) throw ValidationError("scene: cell count mismatch");

    for (int i = 0; i < g.size(); ++i) {
        const Cell& c = g.at_index(i);
        if (c.occ == Occupancy::Unknown && c.label != kNoLabel)
            throw ValidationError("scene: unknown cell " + std::to_string(i) + " carries a label");
        if (c.label != kNoLabel && static_cast<std::size_t>(c.label) >= scene.labels.count())
            throw ValidationError("scene: cell " + std::to_string(i) + " label out of range");
    }
    for (int idx : scene.inaccessible)
        if (idx < 0 || idx >= g.size())
            throw ValidationError("scene: inaccessible cell " + std::to_string(idx) + " out of bounds");

    // The accessible free set must be one connected component; flood fill from
    // any of its cells must reach exactly the free cells not listed inaccessible.
    int start = -1;
    int free_accessible = 0;
    for (int i = 0; i < g.size(); ++i) {
        if (g.is_free(i) && !scene.inaccessible.count(i)) {
            if (start < 0) start = i;
            ++free_accessible;
        }
    }
    if (start < 0) throw ValidationError("scene: no accessible free cells");
    std::vector<int> reached = flood_free(g, start, /*blocked=*/{});
    std::set<int> reached_set(reached.begin(), reached.end());
    for (int idx : reached)
        if (scene.inaccessible.count(idx))
            throw ValidationError("scene: inaccessible cell " + std::to_string(idx) +
                                  " is reachable from the main free component");
    if (static_cast<int>(reached.size()) != free_accessible) {
        for (int i = 0; i < g.size(); ++i)
            if (g.is_free(i) && !scene.inaccessible.count(i) && !reached_set.count(i))
                throw ValidationError("scene: free cell " + std::to_string(i) +
                                      " unreachable and not listed inaccessible");
    }
}

SceneSpec load_scene(const std::string& path, const std::vector<std::string>& allowed_labels) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": missing header line");
    std::istringstream hs(header);
    int w = 0, h = 0;
    double res = 0.0;
    if (!(hs >> w >> h >> res)) throw ParseError(path + ": malformed header, expected 'W H RES'");
    if (w <= 0 || h <= 0 || !(res > 0.0)) throw ParseError(path + ": invalid grid dimensions");

    std::vector<std::string> rows;
    rows.reserve(static_cast<std::size_t>(h));
    std::string line;
    while (static_cast<int>(rows.size()) < h) {
        if (!std::getline(in, line)) throw ParseError(path + ": expected " + std::to_string(h) + " rows");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (static_cast<int>(line.size()) != w)
            throw ParseError(path + ": row " + std::to_string(rows.size()) + " has " +
                             std::to_string(line.size()) + " tokens, expected " + std::to_string(w));
        rows.push_back(line);
    }

    // Legend is the last content line: "LEGEND b=bedroom k=kitchen ...".
    std::map<char, std::string> legend;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "LEGEND") throw ParseError(path + ": unexpected trailing line '" + line + "'");
        std::string entry;
        while (ls >> entry) {
            if (entry.size() < 3 || entry[1] != '=')
                throw ParseError(path + ": malformed legend entry '" + entry + "'");
            legend[entry[0]] = entry.substr(2);
        }
    }

    SceneSpec scene;
    scene.labels = LabelSet(allowed_labels);
    scene.grid = SemanticGrid(w, h, res);
    scene.name = std::filesystem::path(path).stem().string();

    for (const auto& [ch, label] : legend) {
        if (!scene.labels.find(label))
            throw ValidationError(path + ": legend label '" + label + "' not in the configured label set");
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            char t = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
            Cell& c = scene.grid.at(x, y);
            if (t == '#') {
                c.occ = Occupancy::Occupied;
            } else if (t == '.') {
                c.occ = Occupancy::Unknown;
            } else {
                auto it = legend.find(t);
                if (it == legend.end())
                    throw ParseError(path + ": token '" + std::string(1, t) + "' at cell (" +
                                     std::to_string(x) + "," + std::to_string(y) + ") has no legend entry");
                c.occ = Occupancy::Free;
                c.label = *scene.labels.find(it->second);
            }
        }
    }

    // Optional sidecar with metadata.
    std::string sidecar = path + ".json";
    if (std::ifstream sc(sidecar); sc) {
        nlohmann::json j;
        try {
            sc >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(sidecar + ": " + e.what());
        }
        if (j.contains("name")) scene.name = j["name"].get<std::string>();
        if (j.contains("inaccessible"))
            for (int idx : j["inaccessible"]) scene.inaccessible.insert(idx);
    }

    validate_scene(scene);
    return scene;
}

void save_scene(const SceneSpec& scene, const std::string& path) {
    // Assign legend characters per label actually used, in label-id order.
    std::map<LabelId, char> chars;
    std::string used = "#.";
    std::vector<char> present(scene.labels.count(), 0);
    for (const Cell& c : scene.grid.cells)
        if (c.occ == Occupancy::Free && c.label != kNoLabel) present[static_cast<std::size_t>(c.label)] = 1;
    for (std::size_t i = 0; i < scene.labels.count(); ++i) {
        if (!present[i]) continue;
        char ch = legend_char_for(scene.labels.name(static_cast<LabelId>(i)), used);
        used.push_back(ch);
        chars[static_cast<LabelId>(i)] = ch;
    }

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write scene file: " + path);
    out << scene.grid.width << ' ' << scene.grid.height << ' ' << scene.grid.resolution << '\n';
    for (int y = 0; y < scene.grid.height; ++y) {
        for (int x = 0; x < scene.grid.width; ++x) {
            const Cell& c = scene.grid.at(x, y);
            if (c.occ == Occupancy::Occupied) out << '#';
            else if (c.occ == Occupancy::Unknown) out << '.';
            else out << chars.at(c.label);
        }
        out << '\n';
    }
    out << "LEGEND";
    for (const auto& [id, ch] : chars) out << ' ' << ch << '=' << scene.labels.name(id);
    out << '\n';

    nlohmann::json j;
    j["name"] = scene.name;
    j["inaccessible"] = scene.inaccessible;
    std::ofstream sc(path + ".json");
    sc << j.dump(2) << '\n';
}

namespace {

struct RoomRect {
    int x, y, w, h;  // interior (free) extent
    LabelId label;

    GridPoint center() const { return {x + w / 2, y + h / 2}; }
    bool expanded_overlaps(const RoomRect& o) const {
        // Keep at least a one-cell wall between interiors.
        return o.x <= x + w && x <= o.x + o.w && o.y <= y + h && y <= o.y + o.h;
    }
};

void carve(SemanticGrid& g, int x0, int y0, int x1, int y1, LabelId label, bool overwrite_labels) {
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            if (!g.in_bounds(x, y)) continue;
            Cell& c = g.at(x, y);
            if (c.occ == Occupancy::Free && !overwrite_labels) continue;
            c.occ = Occupancy::Free;
            c.label = label;
        }
}

}  // namespace

SceneSpec generate_scene(const GenParams& params) {
    if (params.rooms < 1) throw GenerationError("generate_scene: rooms must be >= 1");
    if (params.room_min < 3 || params.room_max < params.room_min)
        throw GenerationError("generate_scene: room sizes must be >= 3 cells");
    if (params.corridor_width < 1) throw GenerationError("generate_scene: corridor width must be >= 1");

    LabelSet labels(params.label_names);
    auto hallway = labels.find("hallway");
    if (!hallway) throw GenerationError("generate_scene: label set must contain 'hallway'");
    std::vector<LabelId> room_types;
    for (std::size_t i = 0; i < labels.count(); ++i)
        if (static_cast<LabelId>(i) != *hallway) room_types.push_back(static_cast<LabelId>(i));
    if (room_types.empty()) throw GenerationError("generate_scene: need at least one non-hallway label");

    std::mt19937 rng(params.seed);
    const double avg = (params.room_min + params.room_max) / 2.0;
    const int side = std::max(params.room_max + 4,
                              static_cast<int>(std::ceil(std::sqrt(params.rooms * avg * avg * 3.2))) + 4);

    SemanticGrid grid(side, side, 0.25);
    for (Cell& c : grid.cells) c.occ = Occupancy::Occupied;

    std::uniform_int_distribution<int> size_dist(params.room_min, params.room_max);
    // Types cycle from a random phase: every label appears once the room count
    // reaches the label count, and repeats give multi-instance room types.
    const int type_phase = std::uniform_int_distribution<int>(
        0, static_cast<int>(room_types.size()) - 1)(rng);
    std::vector<RoomRect> rooms;
    for (int r = 0; r < params.rooms; ++r) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            int w = size_dist(rng), h = size_dist(rng);
            if (side - w - 2 < 1 || side - h - 2 < 1) continue;
            std::uniform_int_distribution<int> xd(1, side - w - 2), yd(1, side - h - 2);
            RoomRect cand{xd(rng), yd(rng), w, h,
                          room_types[static_cast<std::size_t>(type_phase + r) % room_types.size()]};
            bool clash = false;
            for (const RoomRect& o : rooms)
                if (cand.expanded_overlaps(o)) { clash = true; break; }
            if (clash) continue;
            rooms.push_back(cand);
            placed = true;
        }
        if (!placed)
            throw GenerationError("generate_scene: failed to place room " + std::to_string(r) +
                                  " after 100 attempts (seed " + std::to_string(params.seed) + ")");
    }

    for (const RoomRect& r : rooms)
        carve(grid, r.x, r.y, r.x + r.w - 1, r.y + r.h - 1, r.label, true);

    // Hallway corridors routed through wall space only, so every room keeps a
    // small number of door openings instead of being criss-crossed. Each room
    // connects to the nearest already connected room via a BFS path over
    // non-interior cells, dilated to the requested width.
    const int dilate = std::max(0, params.corridor_width / 2);
    std::vector<char> interior(static_cast<std::size_t>(grid.size()), 0);
    for (const RoomRect& r : rooms)
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) interior[static_cast<std::size_t>(grid.index(x, y))] = 1;

    auto ring_cells = [&](const RoomRect& r) {
        std::vector<int> out;
        for (int y = r.y - 1; y <= r.y + r.h; ++y)
            for (int x = r.x - 1; x <= r.x + r.w; ++x) {
                if (!grid.in_bounds(x, y)) continue;
                bool inside = x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h;
                bool edge = x == r.x - 1 || x == r.x + r.w || y == r.y - 1 || y == r.y + r.h;
                bool corner = (x == r.x - 1 || x == r.x + r.w) && (y == r.y - 1 || y == r.y + r.h);
                if (!inside && edge && !corner) out.push_back(grid.index(x, y));
            }
        return out;
    };

    for (std::size_t i = 1; i < rooms.size(); ++i) {
        std::size_t nearest = 0;
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t j = 0; j < i; ++j) {
            double d = euclidean(rooms[i].center(), rooms[j].center());
            if (d < best_d) { best_d = d; nearest = j; }
        }
        // Multi-source BFS across non-interior cells from room i's wall ring
        // to room `nearest`'s wall ring.
        std::vector<int> parent(static_cast<std::size_t>(grid.size()), -2);
        std::deque<int> q;
        for (int idx : ring_cells(rooms[i])) {
            parent[static_cast<std::size_t>(idx)] = -1;
            q.push_back(idx);
        }
        std::set<int> goal;
        for (int idx : ring_cells(rooms[nearest])) goal.insert(idx);
        int hit = -1;
        while (!q.empty() && hit < 0) {
            int cur = q.front();
            q.pop_front();
            if (goal.count(cur)) { hit = cur; break; }
            GridPoint p = grid.point(cur);
            for (int k = 0; k < 4; ++k) {
                int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
                if (nx < 1 || ny < 1 || nx >= side - 1 || ny >= side - 1) continue;
                int ni = grid.index(nx, ny);
                if (parent[static_cast<std::size_t>(ni)] != -2 || interior[static_cast<std::size_t>(ni)]) continue;
                parent[static_cast<std::size_t>(ni)] = cur;
                q.push_back(ni);
            }
        }
        if (hit < 0)
            throw GenerationError("generate_scene: no corridor route between rooms (seed " +
                                  std::to_string(params.seed) + ")");
        for (int cur = hit; cur >= 0; cur = parent[static_cast<std::size_t>(cur)]) {
            GridPoint p = grid.point(cur);
            for (int dy = -dilate; dy <= dilate; ++dy)
                for (int dx = -dilate; dx <= dilate; ++dx) {
                    int nx = p.x + dx, ny = p.y + dy;
                    if (nx < 1 || ny < 1 || nx >= side - 1 || ny >= side - 1) continue;
                    if (interior[static_cast<std::size_t>(grid.index(nx, ny))]) continue;
                    Cell& c = grid.at(nx, ny);
                    if (c.occ != Occupancy::Free) {
                        c.occ = Occupancy::Free;
                        c.label = *hallway;
                    }
                }
            if (parent[static_cast<std::size_t>(cur)] == -1) break;
        }
    }

    // Clamp carving overruns at the border, then demote filler walls that touch
    // no free cell to unknown holes: they are not part of the apartment and
    // would otherwise inflate the coverage denominator with unobservable cells.
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            if ((x == 0 || y == 0 || x == side - 1 || y == side - 1) && grid.at(x, y).occ == Occupancy::Free) {
                grid.at(x, y).occ = Occupancy::Occupied;
                grid.at(x, y).label = kNoLabel;
            }
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            Cell& c = grid.at(x, y);
            if (c.occ != Occupancy::Occupied) continue;
            bool touches_free = false;
            for (int dy = -1; dy <= 1 && !touches_free; ++dy)
                for (int dx = -1; dx <= 1 && !touches_free; ++dx)
                    if (grid.in_bounds(x + dx, y + dy) && grid.at(x + dx, y + dy).occ == Occupancy::Free)
                        touches_free = true;
            if (!touches_free) { c.occ = Occupancy::Unknown; c.label = kNoLabel; }
        }

    SceneSpec scene;
    scene.grid = std::move(grid);
    scene.labels = labels;
    scene.name = "gen-" + std::to_string(params.seed) + "-r" + std::to_string(params.rooms);
    try {
        validate_scene(scene);
    } catch (const ValidationError& e) {
        throw GenerationError(std::string("generate_scene: layout failed validation: ") + e.what());
    }
    return scene;
}

ScenarioConfig sample_scenario(std::shared_ptr<const SceneSpec> scene, int robots,
                               const std::string& target_room_type, unsigned seed, Task task,
                               double d_safe) {
    if (!scene) throw InfeasibleScenario("sample_scenario: null scene");
    if (robots < 1) throw InfeasibleScenario("sample_scenario: need at least one robot");

    std::vector<int> free_cells = scene->accessible_free_cells();
    if (free_cells.empty()) throw InfeasibleScenario("sample_scenario: scene has no accessible free cells");
    std::vector<int> target_cells;
    std::optional<LabelId> target_label;
    if (task == Task::Search) {
        target_label = scene->labels.find(target_room_type);
        if (!target_label)
            throw InfeasibleScenario("sample_scenario: unknown target room type '" + target_room_type + "'");
        for (int idx : free_cells)
            if (scene->grid.at_index(idx).label == *target_label) target_cells.push_back(idx);
        if (target_cells.empty())
            throw InfeasibleScenario("sample_scenario: scene has no free cell of type '" + target_room_type + "'");
    }

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

    ScenarioConfig cfg;
    cfg.scene = scene;
    cfg.task = task;
    cfg.target_room_type = task == Task::Search ? target_room_type : "";
    cfg.seed = seed;

    // Rejection-sample spaced starts; bail out if the scene cannot host them.
    std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
    for (int r = 0; r < robots; ++r) {
        bool ok = false;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            GridPoint p = scene->grid.point(free_cells[pick(rng)]);
            bool spaced = true;
            for (const Pose& q : cfg.robot_starts)
                if (euclidean(p, q.point()) < d_safe) { spaced = false; break; }
            if (!spaced) continue;
            cfg.robot_starts.push_back({p.x, p.y, angle(rng)});
            ok = true;
        }
        if (!ok)
            throw InfeasibleScenario("sample_scenario: cannot place robot " + std::to_string(r) +
                                     " with spacing " + std::to_string(d_safe));
    }

    if (task == Task::Search) {
        std::uniform_int_distribution<std::size_t> tpick(0, target_cells.size() - 1);
        cfg.target_cell = target_cells[tpick(rng)];
    }
    return cfg;
}

std::vector<GridPoint> bresenham_line(GridPoint a, GridPoint b) {
    std::vector<GridPoint> out;
    int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
    int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    GridPoint p = a;
    while (true) {
        out.push_back(p);
        if (p == b) break;
        int e2 = 2 * err;
        if (e2 >= dy) { err += dy; p.x += sx; }
        if (e2 <= dx) { err += dx; p.y += sy; }
    }
    return out;
}

}  // namespace sagr
