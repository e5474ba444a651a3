#include <doctest.h>

#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "sagr/scene.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace sagr;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("load_scene: smallest valid scene") {
    auto dir = fixtures::temp_dir("world_min");
    auto path = fixtures::write_file(dir / "one.scene", "1 1 0.5\nb\nLEGEND b=bedroom\n");
    SceneSpec scene = load_scene(path);
    CHECK(scene.grid.width == 1);
    CHECK(scene.grid.height == 1);
    CHECK(scene.grid.at(0, 0).occ == Occupancy::Free);
    CHECK(scene.labels.name(scene.grid.at(0, 0).label) == "bedroom");
}

TEST_CASE("load_scene: legend label outside the configured set is rejected") {
    auto dir = fixtures::temp_dir("world_badlabel");
    auto path = fixtures::write_file(dir / "bad.scene", "1 1 0.5\ng\nLEGEND g=garage\n");
    CHECK_THROWS_AS(load_scene(path), ValidationError);
}

TEST_CASE("load_scene: malformed inputs raise ParseError") {
    auto dir = fixtures::temp_dir("world_parse");
    CHECK_THROWS_AS(load_scene((dir / "absent.scene").string()), ParseError);
    auto bad_header = fixtures::write_file(dir / "h.scene", "nope\n");
    CHECK_THROWS_AS(load_scene(bad_header), ParseError);
    auto short_row = fixtures::write_file(dir / "r.scene", "3 1 0.5\nbb\nLEGEND b=bedroom\n");
    CHECK_THROWS_AS(load_scene(short_row), ParseError);
    auto no_legend = fixtures::write_file(dir / "l.scene", "1 1 0.5\nb\n");
    CHECK_THROWS_AS(load_scene(no_legend), ParseError);
}

TEST_CASE("load_scene: two-room fixture matches a flood-fill region count") {
    SceneSpec scene = load_scene(std::string(SAGR_TEST_DATA) + "/two_rooms.scene");
    std::set<LabelId> labels;
    for (const Cell& c : scene.grid.cells)
        if (c.occ == Occupancy::Free) labels.insert(c.label);
    CHECK(labels.size() == 2);

    auto observed = fixtures::fully_observed(scene.grid);
    auto comps = oracle::label_components(observed);
    CHECK(comps.size() == 2);
}

TEST_CASE("scene round-trip is content-identical") {
    SceneSpec scene = load_scene(std::string(SAGR_TEST_DATA) + "/two_rooms.scene");
    auto dir = fixtures::temp_dir("world_rt");
    save_scene(scene, (dir / "copy.scene").string());
    SceneSpec again = load_scene((dir / "copy.scene").string());
    CHECK(scene.grid == again.grid);
    CHECK(scene.labels == again.labels);
    CHECK(scene.inaccessible == again.inaccessible);
}

TEST_CASE("load_scene: unreachable free cells must be declared inaccessible") {
    auto dir = fixtures::temp_dir("world_pocket");
    // 5x1 strip with a wall splitting two free regions.
    std::string body = "5 1 0.5\nbb#bb\nLEGEND b=bedroom\n";
    auto path = fixtures::write_file(dir / "pocket.scene", body);
    CHECK_THROWS_AS(load_scene(path), ValidationError);

    fixtures::write_file(dir / "pocket.scene.json", R"({"name":"pocket","inaccessible":[3,4]})");
    SceneSpec scene = load_scene(path);
    CHECK(scene.name == "pocket");
    CHECK(scene.inaccessible == std::set<int>{3, 4});
    CHECK(scene.accessible_free_cells() == std::vector<int>{0, 1});
}

TEST_CASE("generate_scene: one room is a single connected labeled region") {
    GenParams p;
    p.rooms = 1;
    p.seed = 11;
    SceneSpec scene = generate_scene(p);
    auto observed = fixtures::fully_observed(scene.grid);
    auto comps = oracle::label_components(observed);
    CHECK(comps.size() == 1);
    CHECK(scene.accessible_free_cells().size() == comps[0].cells.size());
}

TEST_CASE("generate_scene: deterministic per seed") {
    GenParams p;
    p.rooms = 5;
    p.seed = 7;
    SceneSpec a = generate_scene(p);
    SceneSpec b = generate_scene(p);
    CHECK(a.grid == b.grid);

    auto dir = fixtures::temp_dir("world_det");
    save_scene(a, (dir / "a.scene").string());
    save_scene(b, (dir / "b.scene").string());
    CHECK(slurp((dir / "a.scene").string()) == slurp((dir / "b.scene").string()));
}

TEST_CASE("generate_scene: all free cells mutually reachable") {
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
        GenParams p;
        p.rooms = 4;
        p.seed = seed;
        SceneSpec scene = generate_scene(p);
        // BFS from the first free cell must reach every free cell.
        const SemanticGrid& g = scene.grid;
        int start = -1, total = 0;
        for (int i = 0; i < g.size(); ++i)
            if (g.is_free(i)) {
                if (start < 0) start = i;
                ++total;
            }
        REQUIRE(start >= 0);
        std::set<int> seen{start};
        std::deque<int> q{start};
        while (!q.empty()) {
            int cur = q.front();
            q.pop_front();
            GridPoint pt = g.point(cur);
            for (int k = 0; k < 4; ++k) {
                int nx = pt.x + kN4dx[k], ny = pt.y + kN4dy[k];
                if (!g.in_bounds(nx, ny)) continue;
                int ni = g.index(nx, ny);
                if (g.is_free(ni) && !seen.count(ni)) {
                    seen.insert(ni);
                    q.push_back(ni);
                }
            }
        }
        CHECK(static_cast<int>(seen.size()) == total);
        CHECK(scene.inaccessible.empty());
    }
}

TEST_CASE("generate_scene: every occupied cell touches free space") {
    GenParams p;
    p.rooms = 6;
    p.seed = 3;
    SceneSpec scene = generate_scene(p);
    const SemanticGrid& g = scene.grid;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            if (g.at(x, y).occ != Occupancy::Occupied) continue;
            bool touches = false;
            for (int dy = -1; dy <= 1 && !touches; ++dy)
                for (int dx = -1; dx <= 1 && !touches; ++dx)
                    if (g.in_bounds(x + dx, y + dy) && g.at(x + dx, y + dy).occ == Occupancy::Free)
                        touches = true;
            CHECK(touches);
        }
}

TEST_CASE("sample_scenario: spacing, placement, determinism") {
    auto scene = std::make_shared<const SceneSpec>(
        load_scene(std::string(SAGR_TEST_DATA) + "/two_rooms.scene"));

    ScenarioConfig cfg = sample_scenario(scene, 2, "bedroom", 3);
    REQUIRE(cfg.robot_starts.size() == 2);
    CHECK(euclidean(cfg.robot_starts[0].point(), cfg.robot_starts[1].point()) >= 2.0);
    for (const Pose& p : cfg.robot_starts)
        CHECK(scene->grid.is_free(scene->grid.index(p.point())));
    CHECK(scene->grid.at_index(cfg.target_cell).occ == Occupancy::Free);
    CHECK(scene->labels.name(scene->grid.at_index(cfg.target_cell).label) == "bedroom");

    ScenarioConfig again = sample_scenario(scene, 2, "bedroom", 3);
    CHECK(cfg.target_cell == again.target_cell);
    REQUIRE(again.robot_starts.size() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(cfg.robot_starts[static_cast<std::size_t>(i)].x == again.robot_starts[static_cast<std::size_t>(i)].x);
        CHECK(cfg.robot_starts[static_cast<std::size_t>(i)].y == again.robot_starts[static_cast<std::size_t>(i)].y);
        CHECK(cfg.robot_starts[static_cast<std::size_t>(i)].theta ==
              doctest::Approx(again.robot_starts[static_cast<std::size_t>(i)].theta));
    }
}

TEST_CASE("sample_scenario: absent target type is infeasible") {
    auto scene = std::make_shared<const SceneSpec>(
        load_scene(std::string(SAGR_TEST_DATA) + "/two_rooms.scene"));
    CHECK_THROWS_AS(sample_scenario(scene, 2, "closet", 1), InfeasibleScenario);
}

TEST_CASE("sample_scenario: spacing holds across random seeds") {
    GenParams p;
    p.rooms = 5;
    p.seed = 21;
    auto scene = std::make_shared<const SceneSpec>(generate_scene(p));
    for (unsigned seed = 0; seed < 25; ++seed) {
        ScenarioConfig cfg = sample_scenario(scene, 4, "", seed, Task::Explore, 2.0);
        for (std::size_t i = 0; i < cfg.robot_starts.size(); ++i) {
            CHECK(scene->grid.is_free(scene->grid.index(cfg.robot_starts[i].point())));
            CHECK(!scene->inaccessible.count(scene->grid.index(cfg.robot_starts[i].point())));
            for (std::size_t j = i + 1; j < cfg.robot_starts.size(); ++j)
                CHECK(euclidean(cfg.robot_starts[i].point(), cfg.robot_starts[j].point()) >= 2.0);
        }
    }
}
