#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sagr/allocation.hpp"
#include "sagr/areagraph.hpp"
#include "sagr/navigation.hpp"
#include "sagr/planner.hpp"
#include "sagr/scene.hpp"

namespace sagr {

enum class Strategy { SAGR, HungarianGlobal, NearestFrontier, VoronoiFrontier };
enum class PlannerKind { LLM, Rule, MockScript };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct EpisodeConfig {
    ScenarioConfig scenario;
    Strategy strategy = Strategy::SAGR;
    PlannerKind planner = PlannerKind::Rule;
    std::string mock_script;  // response script for PlannerKind::MockScript
    EndpointConfig endpoint;
    int t_coord = 50;
    double pi_threshold = 0.95;
    int max_steps = 5000;
    SensorConfig sensor;
    double d_safe = 2.0;
    int v_max = 1;
    int c_max = 8;
    AblationFlags ablation;
    unsigned seed = 0;
    bool snapshots = false;
    std::string snapshot_dir;

    void validate() const;  // throws ConfigError
};

// One coordination event.
struct CycleRecord {
    int cycle = 0;
    int step = 0;
    int rooms = 0;
    std::string graph_text;
    std::string prompt;
    std::string response;
    std::map<int, std::string> assignment;
    bool free_explore = false;
    std::string summary;
    int retries = 0;
    bool fallback_used = false;
    double planner_latency_s = 0.0;  // volatile: excluded from determinism fingerprints
};

struct EpisodeResult {
    bool completed = false;
    int steps = 0;
    std::vector<double> coverage_curve;  // revealed fraction after each step's sensing
    std::optional<int> target_found_step;
    std::vector<CycleRecord> cycles;
    std::vector<Pose> final_poses;

    // Invariant telemetry maintained by the loop, consumed by the test suites.
    double min_pairwise_spacing = std::numeric_limits<double>::infinity();
    bool robots_on_free = true;   // robots only ever on observed-free cells
    int stall_events = 0;         // path invalidations left unremediated for a step
    int blocked_robot_steps = 0;  // robot-steps spent fully blocked on spacing
    bool frontier_exhausted = false;
};

EpisodeResult run_episode(const EpisodeConfig& cfg);

// --- metrics -----------------------------------------------------------

struct ScaleThresholds {
    int small_max_free = 399;   // accessible free cells
    int medium_max_free = 899;
};

std::string classify_scale(int accessible_free_cells, const ScaleThresholds& t = {});

struct EpisodeSummary {
    std::string strategy;  // strategy label, ablation variants suffixed
    std::string scale;
    std::string task;
    int steps = 0;
    bool completed = false;
    double planner_latency_mean_s = 0.0;
};

struct MetricsRow {
    std::string strategy;
    std::string scale;
    std::string task;
    int episodes = 0;
    double mean_steps = 0.0;
    double sd_steps = 0.0;  // sample standard deviation, 0 for a single episode
    double success_rate = 0.0;
    double mean_planner_latency_s = 0.0;
};

// Per (strategy, scale, task) aggregation, rows sorted by key.
std::vector<MetricsRow> compute_metrics(const std::vector<EpisodeSummary>& episodes);

EpisodeSummary summarize_episode(const EpisodeConfig& cfg, const EpisodeResult& result);

}  // namespace sagr
