#include "sagr/cli.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sagr/records.hpp"
#include "sagr/sim.hpp"

namespace fs = std::filesystem;

namespace sagr {

namespace {

PlannerKind parse_planner(const std::string& spec, std::string& mock_script) {
    if (spec == "llm") return PlannerKind::LLM;
    if (spec == "rule") return PlannerKind::Rule;
    if (spec.rfind("mock:", 0) == 0) {
        mock_script = spec.substr(5);
        if (mock_script.empty()) throw ConfigError("--planner mock: requires a script path");
        return PlannerKind::MockScript;
    }
    throw ConfigError("unknown planner '" + spec + "' (expected llm|rule|mock:PATH)");
}

// Scene cache so batch episodes share one immutable SceneSpec per file.
class SceneCache {
public:
    std::shared_ptr<const SceneSpec> get(const std::string& path) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(path);
        if (it != cache_.end()) return it->second;
        auto scene = std::make_shared<const SceneSpec>(load_scene(path));
        cache_.emplace(path, scene);
        return scene;
    }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const SceneSpec>> cache_;
};

struct EpisodeSpec {
    std::string scene_path;
    EpisodeConfig cfg;  // scenario filled once the scene is loaded
    int robots = 2;
};

EpisodeConfig build_episode(const EpisodeSpec& spec, SceneCache& scenes) {
    EpisodeConfig cfg = spec.cfg;
    auto scene = scenes.get(spec.scene_path);
    Task task = cfg.scenario.task;
    cfg.scenario = sample_scenario(scene, spec.robots, cfg.scenario.target_room_type, cfg.seed,
                                   task, cfg.d_safe);
    return cfg;
}

int run_one_and_write(const EpisodeConfig& cfg, const std::string& out_dir,
                      const std::string& stem) {
    EpisodeResult result = run_episode(cfg);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_episode_jsonl(cfg, result, out_dir + "/" + stem + ".jsonl");
    }
    return result.completed ? 0 : 2;
}

struct ManifestEntry {
    EpisodeSpec spec;
};

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest parse error: ") + e.what());
    }
    if (!j.contains("episodes") || !j["episodes"].is_array())
        throw ConfigError("manifest: missing 'episodes' array");

    fs::path base = fs::path(path).parent_path();
    std::vector<ManifestEntry> out;
    for (const auto& e : j["episodes"]) {
        ManifestEntry m;
        std::string scene = e.at("scene").get<std::string>();
        fs::path scene_path = fs::path(scene).is_absolute() ? fs::path(scene) : base / scene;
        if (!fs::exists(scene_path)) throw ConfigError("manifest: scene file not found: " + scene_path.string());
        m.spec.scene_path = scene_path.string();
        EpisodeConfig& c = m.spec.cfg;
        c.strategy = strategy_from_name(e.value("strategy", "sagr"));
        c.planner = parse_planner(e.value("planner", "rule"), c.mock_script);
        if (e.contains("mock_script")) c.mock_script = e["mock_script"].get<std::string>();
        m.spec.robots = e.value("robots", 2);
        c.scenario.task = task_from_name(e.value("task", "explore"));
        c.scenario.target_room_type = e.value("target_type", "");
        c.seed = e.value("seed", 0u);
        c.t_coord = e.value("tcoord", 50);
        c.pi_threshold = e.value("pi", 0.95);
        c.max_steps = e.value("max_steps", 5000);
        c.d_safe = e.value("d_safe", 2.0);
        c.v_max = e.value("v_max", 1);
        c.c_max = e.value("c_max", 8);
        c.sensor.d_det = e.value("d_det", 10);
        c.sensor.theta_det = e.value("theta_det", M_PI / 2.0);
        out.push_back(std::move(m));
    }
    return out;
}

int cmd_gen(int rooms, int count, unsigned seed, const std::string& out_dir, int room_min,
            int room_max, int corridor_width) {
    fs::create_directories(out_dir);
    nlohmann::json manifest;
    manifest["schema"] = "sagr-scenes v1";
    manifest["scenes"] = nlohmann::json::array();
    for (int i = 0; i < count; ++i) {
        GenParams params;
        params.rooms = rooms;
        params.room_min = room_min;
        params.room_max = room_max;
        params.corridor_width = corridor_width;
        params.seed = seed + static_cast<unsigned>(i);
        SceneSpec scene = generate_scene(params);
        std::string file = out_dir + "/" + scene.name + ".scene";
        save_scene(scene, file);
        manifest["scenes"].push_back({{"file", scene.name + ".scene"},
                                      {"seed", params.seed},
                                      {"rooms", rooms},
                                      {"free_cells", scene.accessible_free_cells().size()}});
        std::cout << file << '\n';
    }
    std::ofstream mf(out_dir + "/scenes.json");
    mf << manifest.dump(2) << '\n';
    return 0;
}

}  // namespace

int run_manifest(const std::string& manifest_path, const std::string& out_dir, int jobs,
                 bool ablate_variants) {
    std::vector<ManifestEntry> entries = load_manifest(manifest_path);
    SceneCache scenes;

    struct Job {
        EpisodeConfig cfg;
        std::string stem;
    };
    std::vector<Job> todo;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        EpisodeConfig base = build_episode(entries[i].spec, scenes);
        auto add = [&](AblationFlags flags, const std::string& tag) {
            Job job{base, ""};
            job.cfg.ablation = flags;
            job.cfg.strategy = ablate_variants ? Strategy::SAGR : base.strategy;
            job.stem = "ep" + std::to_string(i) + "_" + strategy_name(job.cfg.strategy) + tag + "_" +
                       task_name(job.cfg.scenario.task) + "_s" + std::to_string(job.cfg.seed);
            todo.push_back(std::move(job));
        };
        if (ablate_variants) {
            add({}, "");
            add({.no_neighbors = true}, "+no_neighbors");
            add({.no_summary = true}, "+no_summary");
            add({.no_target = true}, "+no_target");
        } else {
            add(base.ablation, "");
        }
    }

    fs::create_directories(out_dir);
    std::vector<EpisodeSummary> summaries(todo.size());
    std::vector<int> codes(todo.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) break;
            EpisodeResult result = run_episode(todo[i].cfg);
            write_episode_jsonl(todo[i].cfg, result, out_dir + "/" + todo[i].stem + ".jsonl");
            summaries[i] = summarize_episode(todo[i].cfg, result);
            codes[i] = result.completed ? 0 : 2;
        }
    };
    int n_threads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::string table = metrics_csv(compute_metrics(summaries));
    std::ofstream csv(out_dir + "/summary.csv");
    csv << table;
    std::cout << table;
    return 0;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"SAGR multi-robot exploration and semantic search simulator"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate procedural scenes");
    int g_rooms = 6, g_count = 1, g_room_min = 5, g_room_max = 9, g_corridor = 3;
    unsigned g_seed = 0;
    std::string g_out = ".";
    gen->add_option("--rooms", g_rooms, "rooms per scene");
    gen->add_option("--count", g_count, "number of scenes");
    gen->add_option("--seed", g_seed, "base seed");
    gen->add_option("--out", g_out, "output directory");
    gen->add_option("--room-min", g_room_min, "min room side, cells");
    gen->add_option("--room-max", g_room_max, "max room side, cells");
    gen->add_option("--corridor-width", g_corridor, "corridor width, cells");

    // run
    auto* run = app.add_subcommand("run", "run a single episode");
    std::string r_scene, r_strategy = "sagr", r_planner = "rule", r_task = "explore";
    std::string r_target, r_out, r_config;
    int r_robots = 2, r_tcoord = 50, r_max_steps = 5000, r_vmax = 1, r_cmax = 8, r_ddet = 10;
    double r_pi = 0.95, r_dsafe = 2.0, r_theta = M_PI / 2.0;
    unsigned r_seed = 0;
    bool r_snapshots = false, r_no_neighbors = false, r_no_summary = false, r_no_target = false;
    run->add_option("--scene", r_scene, "scene file");
    run->add_option("--strategy", r_strategy, "sagr|hungarian|nearest|voronoi");
    run->add_option("--planner", r_planner, "llm|rule|mock:PATH");
    run->add_option("--robots", r_robots, "team size");
    run->add_option("--task", r_task, "explore|search");
    run->add_option("--target-type", r_target, "target room type for search");
    run->add_option("--tcoord", r_tcoord, "coordination interval, steps");
    run->add_option("--pi", r_pi, "coverage threshold");
    run->add_option("--seed", r_seed, "scenario seed");
    run->add_option("--max-steps", r_max_steps, "step cap");
    run->add_option("--dsafe", r_dsafe, "min robot spacing, cells");
    run->add_option("--vmax", r_vmax, "cells per step");
    run->add_option("--cmax", r_cmax, "frontier cluster BFS cap");
    run->add_option("--ddet", r_ddet, "sensor range, cells");
    run->add_option("--theta-det", r_theta, "sensor FoV, radians");
    run->add_option("--out", r_out, "output directory for records");
    run->add_option("--config", r_config, "JSON config file (flags override)");
    run->add_flag("--snapshots", r_snapshots, "write per-cycle map snapshots");
    run->add_flag("--no-neighbors", r_no_neighbors, "ablation: drop adjacency context");
    run->add_flag("--no-summary", r_no_summary, "ablation: drop plan summary");
    run->add_flag("--no-target", r_no_target, "ablation: drop target room type");

    // bench / ablate
    auto* bench = app.add_subcommand("bench", "run a manifest of episodes");
    std::string b_manifest, b_out = "bench-out";
    int b_jobs = 1;
    bench->add_option("--manifest", b_manifest, "manifest JSON")->required();
    bench->add_option("--out", b_out, "output directory");
    bench->add_option("--jobs", b_jobs, "parallel episodes");

    auto* ablate = app.add_subcommand("ablate", "run SAGR ablation variants over a manifest");
    std::string a_manifest, a_out = "ablate-out";
    int a_jobs = 1;
    ablate->add_option("--manifest", a_manifest, "manifest JSON")->required();
    ablate->add_option("--out", a_out, "output directory");
    ablate->add_option("--jobs", a_jobs, "parallel episodes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen(g_rooms, g_count, g_seed, g_out, g_room_min, g_room_max, g_corridor);

        if (run->parsed()) {
            // Precedence: flags > config file > defaults.
            if (!r_config.empty()) {
                std::ifstream in(r_config);
                if (!in) throw ConfigError("cannot open config file: " + r_config);
                nlohmann::json j;
                in >> j;
                auto maybe = [&](const char* key, auto& slot, const std::string& flag) {
                    if (j.contains(key) && run->count(flag) == 0)
                        slot = j[key].get<std::decay_t<decltype(slot)>>();
                };
                maybe("scene", r_scene, "--scene");
                maybe("strategy", r_strategy, "--strategy");
                maybe("planner", r_planner, "--planner");
                maybe("robots", r_robots, "--robots");
                maybe("task", r_task, "--task");
                maybe("target_type", r_target, "--target-type");
                maybe("tcoord", r_tcoord, "--tcoord");
                maybe("pi", r_pi, "--pi");
                maybe("seed", r_seed, "--seed");
                maybe("max_steps", r_max_steps, "--max-steps");
                maybe("d_safe", r_dsafe, "--dsafe");
                maybe("v_max", r_vmax, "--vmax");
                maybe("c_max", r_cmax, "--cmax");
                maybe("d_det", r_ddet, "--ddet");
                maybe("theta_det", r_theta, "--theta-det");
            }
            if (r_scene.empty()) throw ConfigError("run: --scene is required");

            EpisodeSpec spec;
            spec.scene_path = r_scene;
            spec.robots = r_robots;
            EpisodeConfig& c = spec.cfg;
            c.strategy = strategy_from_name(r_strategy);
            c.planner = parse_planner(r_planner, c.mock_script);
            c.scenario.task = task_from_name(r_task);
            c.scenario.target_room_type = r_target;
            c.seed = r_seed;
            c.t_coord = r_tcoord;
            c.pi_threshold = r_pi;
            c.max_steps = r_max_steps;
            c.d_safe = r_dsafe;
            c.v_max = r_vmax;
            c.c_max = r_cmax;
            c.sensor.d_det = r_ddet;
            c.sensor.theta_det = r_theta;
            c.ablation = {r_no_neighbors, r_no_summary, r_no_target};
            c.snapshots = r_snapshots;
            if (r_snapshots) c.snapshot_dir = (r_out.empty() ? std::string(".") : r_out) + "/snapshots";

            SceneCache scenes;
            EpisodeConfig cfg = build_episode(spec, scenes);
            std::string stem = "run_" + strategy_name(cfg.strategy) + "_" +
                               task_name(cfg.scenario.task) + "_s" + std::to_string(cfg.seed);
            int code = run_one_and_write(cfg, r_out, stem);
            std::cout << (code == 0 ? "completed" : "failed-incomplete") << '\n';
            return code;
        }

        if (bench->parsed()) return run_manifest(b_manifest, b_out, b_jobs, false);
        if (ablate->parsed()) return run_manifest(a_manifest, a_out, a_jobs, true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace sagr
