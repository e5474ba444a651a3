#include "sagr/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sagr {

namespace {

std::string planner_kind_name(PlannerKind k) {
    switch (k) {
        case PlannerKind::LLM: return "llm";
        case PlannerKind::Rule: return "rule";
        case PlannerKind::MockScript: return "mock";
    }
    return "?";
}

}  // namespace

nlohmann::json config_to_json(const EpisodeConfig& cfg) {
    nlohmann::json j;
    j["scene"] = cfg.scenario.scene ? cfg.scenario.scene->name : "";
    j["strategy"] = strategy_name(cfg.strategy);
    j["planner"] = planner_kind_name(cfg.planner);
    j["robots"] = cfg.scenario.robot_starts.size();
    j["task"] = task_name(cfg.scenario.task);
    j["target_room_type"] = cfg.scenario.target_room_type;
    j["target_cell"] = cfg.scenario.target_cell;
    j["t_coord"] = cfg.t_coord;
    j["pi_threshold"] = cfg.pi_threshold;
    j["max_steps"] = cfg.max_steps;
    j["d_safe"] = cfg.d_safe;
    j["v_max"] = cfg.v_max;
    j["c_max"] = cfg.c_max;
    j["sensor"] = {{"d_det", cfg.sensor.d_det}, {"theta_det", cfg.sensor.theta_det}, {"rays", cfg.sensor.rays}};
    j["ablation"] = {{"no_neighbors", cfg.ablation.no_neighbors},
                     {"no_summary", cfg.ablation.no_summary},
                     {"no_target", cfg.ablation.no_target}};
    j["seed"] = cfg.seed;
    return j;
}

nlohmann::json cycle_to_json(const CycleRecord& rec) {
    nlohmann::json j;
    j["record"] = "cycle";
    j["cycle"] = rec.cycle;
    j["step"] = rec.step;
    j["rooms"] = rec.rooms;
    j["graph_text"] = rec.graph_text;
    j["prompt"] = rec.prompt;
    j["response"] = rec.response;
    nlohmann::json mapping = nlohmann::json::object();
    for (const auto& [robot, room] : rec.assignment) mapping[std::to_string(robot)] = room;
    j["assignment"] = mapping;
    j["free_explore"] = rec.free_explore;
    j["summary"] = rec.summary;
    j["retries"] = rec.retries;
    j["fallback_used"] = rec.fallback_used;
    j["planner_latency_s"] = rec.planner_latency_s;
    return j;
}

nlohmann::json result_summary_json(const EpisodeConfig& cfg, const EpisodeResult& result) {
    nlohmann::json j;
    j["record"] = "summary";
    j["schema"] = "sagr-episode v1";
    j["config"] = config_to_json(cfg);
    j["completed"] = result.completed;
    j["steps"] = result.steps;
    if (result.target_found_step) j["target_found_step"] = *result.target_found_step;
    j["coverage_final"] = result.coverage_curve.empty() ? 0.0 : result.coverage_curve.back();
    j["coverage_curve"] = result.coverage_curve;
    j["cycles"] = result.cycles.size();
    j["frontier_exhausted"] = result.frontier_exhausted;
    j["stall_events"] = result.stall_events;
    return j;
}

void write_episode_jsonl(const EpisodeConfig& cfg, const EpisodeResult& result,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write episode record: " + path);
    for (const CycleRecord& rec : result.cycles) out << cycle_to_json(rec).dump() << '\n';
    out << result_summary_json(cfg, result).dump() << '\n';
}

std::string episode_fingerprint(const EpisodeResult& result) {
    nlohmann::json j;
    j["completed"] = result.completed;
    j["steps"] = result.steps;
    if (result.target_found_step) j["target_found_step"] = *result.target_found_step;
    j["coverage_curve"] = result.coverage_curve;
    j["frontier_exhausted"] = result.frontier_exhausted;
    nlohmann::json cycles = nlohmann::json::array();
    for (const CycleRecord& rec : result.cycles) {
        nlohmann::json c = cycle_to_json(rec);
        c["planner_latency_s"] = 0.0;
        cycles.push_back(c);
    }
    j["cycles"] = cycles;
    nlohmann::json poses = nlohmann::json::array();
    for (const Pose& p : result.final_poses) poses.push_back({p.x, p.y});
    j["final_poses"] = poses;
    return j.dump();
}

std::string observed_to_text(const ObservedMap& observed, const LabelSet& labels) {
    (void)labels;
    std::ostringstream out;
    const SemanticGrid& g = observed.grid;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const Cell& c = g.at(x, y);
            if (c.occ == Occupancy::Unknown) out << '.';
            else if (c.occ == Occupancy::Occupied) out << '#';
            else if (c.label == kNoLabel) out << ' ';
            else out << static_cast<char>('a' + c.label % 26);
        }
        out << '\n';
    }
    return out.str();
}

void write_snapshot(const ObservedMap& observed, const LabelSet& labels, const std::string& dir,
                    int cycle) {
    std::filesystem::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof(name), "cycle_%03d", cycle);
    std::ofstream txt(dir + "/" + name + ".txt");
    txt << observed_to_text(observed, labels);

    const SemanticGrid& g = observed.grid;
    std::ofstream pgm(dir + "/" + name + ".pgm", std::ios::binary);
    pgm << "P5\n" << g.width << ' ' << g.height << "\n255\n";
    for (const Cell& c : g.cells) {
        unsigned char v = c.occ == Occupancy::Unknown ? 128 : (c.occ == Occupancy::Occupied ? 0 : 255);
        pgm.write(reinterpret_cast<const char*>(&v), 1);
    }
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "strategy,scale,task,episodes,mean_steps,sd_steps,success_rate,mean_planner_latency_s\n";
    out << std::fixed << std::setprecision(4);
    for (const MetricsRow& r : rows)
        out << r.strategy << ',' << r.scale << ',' << r.task << ',' << r.episodes << ',' << r.mean_steps
            << ',' << r.sd_steps << ',' << r.success_rate << ',' << r.mean_planner_latency_s << '\n';
    return out.str();
}

}  // namespace sagr
