#include "sagr/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <set>

#include "sagr/records.hpp"

namespace sagr {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::SAGR: return "sagr";
        case Strategy::HungarianGlobal: return "hungarian";
        case Strategy::NearestFrontier: return "nearest";
        case Strategy::VoronoiFrontier: return "voronoi";
    }
    return "?";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "sagr") return Strategy::SAGR;
    if (name == "hungarian") return Strategy::HungarianGlobal;
    if (name == "nearest") return Strategy::NearestFrontier;
    if (name == "voronoi") return Strategy::VoronoiFrontier;
    throw ConfigError("unknown strategy: " + name);
}

void EpisodeConfig::validate() const {
    if (!scenario.scene) throw ConfigError("episode: missing scene");
    if (scenario.robot_starts.empty()) throw ConfigError("episode: no robots");
    if (t_coord < 1) throw ConfigError("episode: t_coord must be >= 1");
    if (!(pi_threshold > 0.0 && pi_threshold <= 1.0)) throw ConfigError("episode: pi_threshold must be in (0,1]");
    if (max_steps < 1) throw ConfigError("episode: max_steps must be >= 1");
    if (!sensor.valid()) throw ConfigError("episode: invalid sensor config");
    if (v_max < 1) throw ConfigError("episode: v_max must be >= 1");
    if (c_max < 1) throw ConfigError("episode: c_max must be >= 1");
    if (d_safe < 0.0) throw ConfigError("episode: d_safe must be >= 0");
    if (planner == PlannerKind::MockScript && mock_script.empty())
        throw ConfigError("episode: mock planner requires a script path");
    if (scenario.task == Task::Search) {
        if (scenario.target_cell < 0 || scenario.target_cell >= scenario.scene->grid.size())
            throw ConfigError("episode: search task requires a valid target cell");
        if (scenario.target_room_type.empty())
            throw ConfigError("episode: search task requires a target room type");
    }
    for (const Pose& p : scenario.robot_starts)
        if (!scenario.scene->grid.in_bounds(p.point()) ||
            !scenario.scene->grid.is_free(scenario.scene->grid.index(p.point())))
            throw ConfigError("episode: robot start not on a free cell");
}

namespace {

class EpisodeRunner {
public:
    explicit EpisodeRunner(const EpisodeConfig& cfg)
        : cfg_(cfg), scene_(*cfg.scenario.scene), observed_(scene_.grid) {
        cfg_.validate();
        denominator_ = scene_.coverage_denominator();
        for (std::size_t i = 0; i < cfg_.scenario.robot_starts.size(); ++i) {
            RobotState r;
            r.id = static_cast<int>(i);
            r.pose = cfg_.scenario.robot_starts[i];
            r.v_max = cfg_.v_max;
            robots_.push_back(r);
        }
        switch (cfg_.planner) {
            case PlannerKind::Rule:
                planner_ = std::make_unique<RulePlanner>();
                break;
            case PlannerKind::LLM:
                planner_ = std::make_unique<LlmPlanner>(make_http_transport(), cfg_.endpoint);
                break;
            case PlannerKind::MockScript:
                planner_ = std::make_unique<LlmPlanner>(make_script_transport(cfg_.mock_script), cfg_.endpoint);
                break;
        }
    }

    EpisodeResult run() {
        for (int step = 0; step < cfg_.max_steps; ++step) {
            sense_phase();
            double coverage = denominator_ > 0
                                  ? static_cast<double>(revealed_countable_) / denominator_
                                  : 1.0;
            result_.coverage_curve.push_back(coverage);

            if (cfg_.scenario.task == Task::Search && observed_.is_known(cfg_.scenario.target_cell)) {
                result_.completed = true;
                result_.target_found_step = step + 1;
                result_.steps = step + 1;
                finish();
                return result_;
            }
            if (cfg_.scenario.task == Task::Explore && coverage >= cfg_.pi_threshold - 1e-12) {
                result_.completed = true;
                result_.steps = step + 1;
                finish();
                return result_;
            }

            if (step % cfg_.t_coord == 0) coordinate(step);

            for (RobotState& r : robots_) ensure_target(r, step);

            // Exploration exhausted: nothing reachable anywhere for anyone.
            if (std::all_of(robots_.begin(), robots_.end(),
                            [](const RobotState& r) { return r.status == RobotStatus::Idle; }) &&
                clusters_for_step(step).empty()) {
                result_.frontier_exhausted = true;
                result_.steps = step + 1;
                finish();
                return result_;
            }

            step_robots(robots_, observed_, cfg_.d_safe);
            post_move_checks(step);
        }
        result_.steps = cfg_.max_steps;
        finish();
        return result_;
    }

private:
    void finish() {
        for (const RobotState& r : robots_) result_.final_poses.push_back(r.pose);
    }

    void sense_phase() {
        for (RobotState& r : robots_) {
            for (int idx : sense(r.pose, scene_.grid, observed_, cfg_.sensor))
                if (!scene_.inaccessible.count(idx)) ++revealed_countable_;
        }
    }

    std::vector<FrontierCluster>& clusters_for_step(int step) {
        if (cluster_cache_step_ != step) {
            cached_clusters_ = cluster_frontiers(detect_frontiers(observed_), observed_, cfg_.c_max);
            cluster_cache_step_ = step;
        }
        return cached_clusters_;
    }

    std::vector<Pose> poses() const {
        std::vector<Pose> out;
        for (const RobotState& r : robots_) out.push_back(r.pose);
        return out;
    }

    void assign_queue(RobotState& r, std::vector<QueuedWaypoint> goals) {
        r.waypoint_queue = std::move(goals);
        r.path.clear();
        r.path_pos = 0;
        r.last_target = -1;
        r.target_cells.clear();
        r.status = r.waypoint_queue.empty() ? RobotStatus::Idle : RobotStatus::Navigating;
    }

    // A goal is stale once none of the frontier cells it was built from still
    // borders unknown space; pursuing it would reveal nothing new.
    bool goal_stale(const std::vector<int>& cells) const {
        for (int idx : cells) {
            if (!observed_.grid.is_free(idx)) continue;
            GridPoint p = observed_.grid.point(idx);
            for (int k = 0; k < 4; ++k) {
                int nx = p.x + kN4dx[k], ny = p.y + kN4dy[k];
                if (observed_.grid.in_bounds(nx, ny) &&
                    observed_.grid.at(nx, ny).occ == Occupancy::Unknown)
                    return false;
            }
        }
        return true;
    }

    void coordinate(int step) {
        std::vector<FrontierCluster>& clusters = clusters_for_step(step);
        CycleRecord rec;
        rec.cycle = cycle_index_;
        rec.step = step;
        if (!clusters.empty()) {
            switch (cfg_.strategy) {
                case Strategy::SAGR: dispatch_sagr(clusters, rec); break;
                case Strategy::HungarianGlobal: dispatch_hungarian_global(clusters); break;
                case Strategy::NearestFrontier: dispatch_nearest(clusters); break;
                case Strategy::VoronoiFrontier: dispatch_voronoi(clusters); break;
            }
        }
        result_.cycles.push_back(std::move(rec));
        if (cfg_.snapshots && !cfg_.snapshot_dir.empty())
            write_snapshot(observed_, scene_.labels, cfg_.snapshot_dir, cycle_index_);
        ++cycle_index_;
    }

    void dispatch_sagr(std::vector<FrontierCluster>& clusters, CycleRecord& rec) {
        std::vector<Pose> robot_poses = poses();
        AreaGraph graph = build_area_graph(observed_, clusters, robot_poses, &prev_graph_, cycle_index_);

        PlannerContext ctx;
        ctx.input.graph_text =
            serialize(graph, scene_.labels, robot_poses, {.include_neighbors = !cfg_.ablation.no_neighbors});
        ctx.input.prev_summary = prev_summary_;
        ctx.input.task = cfg_.scenario.task;
        if (cfg_.scenario.task == Task::Search && !cfg_.ablation.no_target &&
            !cfg_.scenario.target_room_type.empty())
            ctx.input.target_room_type = cfg_.scenario.target_room_type;
        for (const RobotState& r : robots_) ctx.input.robot_ids.push_back(r.id);
        ctx.input.ablation = cfg_.ablation;
        ctx.graph = &graph;
        ctx.observed = &observed_;
        ctx.clusters = &clusters;
        ctx.robot_poses = robot_poses;
        ctx.labels = &scene_.labels;

        PlanTelemetry tel;
        RoomAssignment assignment;
        auto t0 = std::chrono::steady_clock::now();
        try {
            assignment = planner_->plan(ctx, tel);
        } catch (const PlannerUnavailable&) {
            tel.fallback_used = true;
            assignment = rule_plan(ctx);
        }
        tel.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        rec.rooms = static_cast<int>(graph.nodes.size());
        rec.graph_text = ctx.input.graph_text;
        rec.prompt = tel.prompt;
        rec.response = tel.response;
        rec.assignment = assignment.mapping;
        rec.free_explore = assignment.free_explore;
        rec.summary = assignment.summary;
        rec.retries = tel.retries;
        rec.fallback_used = tel.fallback_used;
        rec.planner_latency_s = tel.latency_s;

        prev_summary_ = assignment.summary;
        prev_graph_ = std::move(graph);

        if (assignment.free_explore) {
            dispatch_nearest(clusters);
            return;
        }
        std::map<std::string, std::vector<int>> groups;
        for (const auto& [robot, room] : assignment.mapping) groups[room].push_back(robot);
        for (auto& [room, members] : groups) {
            auto node = prev_graph_.nodes.find(room);
            if (node == prev_graph_.nodes.end()) {
                for (int robot : members) assign_queue(robots_[static_cast<std::size_t>(robot)], {});
                continue;
            }
            std::sort(members.begin(), members.end());
            std::vector<GridPoint> positions;
            for (int robot : members) positions.push_back(robots_[static_cast<std::size_t>(robot)].pose.point());
            allocate_and_enqueue(members, positions, node->second.frontier_clusters, clusters);
        }
    }

    // Iterative Hungarian over the given clusters, then a TSP-ordered queue
    // per robot. `cluster_ids` indexes into `clusters`.
    void allocate_and_enqueue(const std::vector<int>& members,
                              const std::vector<GridPoint>& positions,
                              const std::vector<int>& cluster_ids,
                              const std::vector<FrontierCluster>& clusters) {
        std::vector<GridPoint> reps;
        for (int ci : cluster_ids)
            reps.push_back(observed_.grid.point(clusters[static_cast<std::size_t>(ci)].rep));
        std::vector<std::vector<int>> alloc = iterative_allocate(positions, reps);
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::vector<GridPoint> mine;
            for (int w : alloc[i]) mine.push_back(reps[static_cast<std::size_t>(w)]);
            std::vector<QueuedWaypoint> queue;
            for (std::size_t o : tsp_order_indices(positions[i], mine)) {
                const FrontierCluster& c =
                    clusters[static_cast<std::size_t>(cluster_ids[static_cast<std::size_t>(alloc[i][o])])];
                queue.push_back({c.rep, c.cells});
            }
            assign_queue(robots_[static_cast<std::size_t>(members[i])], std::move(queue));
        }
    }

    void dispatch_hungarian_global(const std::vector<FrontierCluster>& clusters) {
        std::vector<int> members, cluster_ids;
        std::vector<GridPoint> positions;
        for (const RobotState& r : robots_) {
            members.push_back(r.id);
            positions.push_back(r.pose.point());
        }
        for (std::size_t i = 0; i < clusters.size(); ++i) cluster_ids.push_back(static_cast<int>(i));
        allocate_and_enqueue(members, positions, cluster_ids, clusters);
    }

    void dispatch_nearest(const std::vector<FrontierCluster>& clusters) {
        std::set<std::size_t> claimed;
        for (RobotState& r : robots_) {
            std::vector<int> dist = bfs_distances(r.pose.point(), observed_);
            std::optional<std::size_t> best;
            int best_d = -1;
            for (std::size_t i = 0; i < clusters.size(); ++i) {
                if (claimed.count(i)) continue;
                int d = dist[static_cast<std::size_t>(clusters[i].rep)];
                if (d < 0) continue;
                if (!best || d < best_d) {
                    best = i;
                    best_d = d;
                }
            }
            if (best) {
                claimed.insert(*best);
                assign_queue(r, {{clusters[*best].rep, clusters[*best].cells}});
            } else {
                assign_queue(r, {});
            }
        }
    }

    void dispatch_voronoi(const std::vector<FrontierCluster>& clusters) {
        std::vector<std::vector<int>> dists;
        for (const RobotState& r : robots_) dists.push_back(bfs_distances(r.pose.point(), observed_));
        std::vector<std::vector<int>> claims(robots_.size());
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            int best_robot = -1, best_d = -1;
            for (std::size_t r = 0; r < robots_.size(); ++r) {
                int d = dists[r][static_cast<std::size_t>(clusters[i].rep)];
                if (d < 0) continue;
                if (best_robot < 0 || d < best_d) {
                    best_robot = static_cast<int>(r);
                    best_d = d;
                }
            }
            if (best_robot >= 0) claims[static_cast<std::size_t>(best_robot)].push_back(static_cast<int>(i));
        }
        for (std::size_t r = 0; r < robots_.size(); ++r) {
            std::vector<GridPoint> reps;
            for (int ci : claims[r]) reps.push_back(observed_.grid.point(clusters[static_cast<std::size_t>(ci)].rep));
            std::vector<QueuedWaypoint> queue;
            for (std::size_t o : tsp_order_indices(robots_[r].pose.point(), reps)) {
                const FrontierCluster& c = clusters[static_cast<std::size_t>(claims[r][o])];
                queue.push_back({c.rep, c.cells});
            }
            assign_queue(robots_[r], std::move(queue));
        }
    }

    // Walk toward the nearby reachable cell with the most clearance from the
    // rest of the team. Returns false when no better spot exists.
    bool retreat(RobotState& r) {
        std::vector<int> dist = bfs_distances(r.pose.point(), observed_);
        auto clearance = [&](GridPoint p) {
            double best = std::numeric_limits<double>::max();
            for (const RobotState& other : robots_)
                if (other.id != r.id) best = std::min(best, euclidean(p, other.pose.point()));
            return best;
        };
        int best_cell = -1;
        double best_gain = clearance(r.pose.point());
        for (int i = 0; i < observed_.grid.size(); ++i) {
            if (dist[static_cast<std::size_t>(i)] < 0 || dist[static_cast<std::size_t>(i)] > 10) continue;
            double c = clearance(observed_.grid.point(i));
            if (c > best_gain + 1e-9) {
                best_gain = c;
                best_cell = i;
            }
        }
        if (best_cell < 0) return false;
        auto path = plan_path(r.pose.point(), observed_.grid.point(best_cell), observed_);
        if (!path) return false;
        r.path = std::move(*path);
        r.path_pos = 0;
        r.status = RobotStatus::Navigating;
        return true;
    }

    // Nearest reachable frontier cluster, skipping the robot's own cell and
    // (on the first pass) the target it was just blocked on.
    const FrontierCluster* fallback_target(RobotState& r, int step) {
        const std::vector<FrontierCluster>& clusters = clusters_for_step(step);
        if (clusters.empty()) return nullptr;
        std::vector<int> dist = bfs_distances(r.pose.point(), observed_);
        int here = observed_.grid.index(r.pose.point());
        auto pick = [&](bool allow_avoided) -> const FrontierCluster* {
            const FrontierCluster* best = nullptr;
            int best_d = -1;
            for (const FrontierCluster& c : clusters) {
                if (c.rep == here) continue;
                if (!allow_avoided && c.rep == r.avoid_target) continue;
                int d = dist[static_cast<std::size_t>(c.rep)];
                if (d < 0) continue;
                if (!best || d < best_d) {
                    best = &c;
                    best_d = d;
                }
            }
            return best;
        };
        const FrontierCluster* target = pick(false);
        if (!target && r.avoid_target >= 0) target = pick(true);
        return target;
    }

    void ensure_target(RobotState& r, int step) {
        // A goal whose frontier evaporated is an invalidated plan: drop it now
        // rather than walking to a cell that reveals nothing.
        if (r.has_active_path() && !r.target_cells.empty() && goal_stale(r.target_cells)) {
            r.path.clear();
            r.path_pos = 0;
            r.target_cells.clear();
        }
        if (r.has_active_path()) return;
        if (!r.path.empty()) r.avoid_target = -1;  // completed a leg: jam resolved
        r.path.clear();
        r.path_pos = 0;
        bool fallback_done = false;
        while (true) {
            QueuedWaypoint goal;
            if (!r.waypoint_queue.empty()) {
                goal = std::move(r.waypoint_queue.front());
                r.waypoint_queue.erase(r.waypoint_queue.begin());
                if (goal.rep == r.avoid_target) continue;  // contested; someone else will take it
                if (goal_stale(goal.cells)) continue;
            } else if (!fallback_done) {
                fallback_done = true;
                if (const FrontierCluster* c = fallback_target(r, step)) goal = {c->rep, c->cells};
            }
            if (goal.rep < 0) {
                r.status = RobotStatus::Idle;
                r.last_target = -1;
                r.target_cells.clear();
                // An idle robot sweeps its surroundings by rotating in place;
                // otherwise a pocket behind its fixed sensing cone could stay
                // unknown forever and wedge the whole team.
                r.pose.theta = std::remainder(r.pose.theta + M_PI / 6.0, 2.0 * M_PI);
                return;
            }
            if (goal.rep == observed_.grid.index(r.pose.point())) continue;  // already arrived
            auto path = plan_path(r.pose.point(), observed_.grid.point(goal.rep), observed_);
            if (!path) continue;  // waypoint became unreachable; drop it
            r.path = std::move(*path);
            r.path_pos = 0;
            r.last_target = goal.rep;
            r.target_cells = std::move(goal.cells);
            r.status = RobotStatus::Navigating;
            return;
        }
    }

    void trace_step(int step) {
        const char* env = std::getenv("SAGR_TRACE");
        if (!env) return;
        int every = std::atoi(env);
        if (every < 1) every = 100;
        if (step % every != 0) return;
        std::fprintf(stderr, "step %4d cov=%.4f frontiers=%zu |", step,
                     result_.coverage_curve.empty() ? 0.0 : result_.coverage_curve.back(),
                     clusters_for_step(step).size());
        for (const RobotState& r : robots_)
            std::fprintf(stderr, " r%d(%d,%d)%s%s q=%zu tgt=%d", r.id, r.pose.x, r.pose.y,
                         r.status == RobotStatus::Idle ? "I" : r.status == RobotStatus::Blocked ? "B" : "N",
                         r.blocked_steps > 0 ? "*" : "", r.waypoint_queue.size(), r.last_target);
        std::fprintf(stderr, "\n");
    }

    void post_move_checks(int step) {
        trace_step(step);
        for (const RobotState& r : robots_)
            if (r.status == RobotStatus::Blocked) result_.blocked_robot_steps += 1;
        if (last_positions_.size() == robots_.size()) {
            for (std::size_t i = 0; i < robots_.size(); ++i) {
                RobotState& r = robots_[i];
                if (r.pose.point() == last_positions_[i] && r.status != RobotStatus::Idle)
                    r.stuck_steps += 1;
                else
                    r.stuck_steps = 0;
            }
        }
        last_positions_.clear();
        for (const RobotState& r : robots_) last_positions_.push_back(r.pose.point());

        // Spacing knots: when several robots wedge each other in, the junior
        // ones back off toward open ground so the senior one can pass.
        for (RobotState& r : robots_) {
            if (r.stuck_steps <= 20 + 5 * r.id) continue;
            if (retreat(r)) {
                r.waypoint_queue.clear();
                r.last_target = -1;
                r.target_cells.clear();
                r.stuck_steps = 0;
                r.blocked_steps = 0;
            }
        }
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            int cell = observed_.grid.index(robots_[i].pose.point());
            if (!observed_.grid.is_free(cell)) result_.robots_on_free = false;
            for (std::size_t j = i + 1; j < robots_.size(); ++j)
                result_.min_pairwise_spacing =
                    std::min(result_.min_pairwise_spacing,
                             euclidean(robots_[i].pose.point(), robots_[j].pose.point()));
        }
        for (RobotState& r : robots_) {
            if (r.blocked_steps > 10) {
                // Yield the contested leg but keep the rest of the plan; the
                // avoided rep stays off-limits until the robot gets somewhere.
                r.avoid_target = r.last_target;
                r.path.clear();
                r.path_pos = 0;
                r.last_target = -1;
                r.target_cells.clear();
                r.blocked_steps = 0;
            }
        }
        // Independent stall probe: an idle robot with any reachable frontier
        // off its own cell means the fallback machinery failed.
        for (RobotState& r : robots_) {
            if (r.status != RobotStatus::Idle) continue;
            const std::vector<FrontierCluster>& clusters = clusters_for_step(step);
            if (clusters.empty()) continue;
            std::vector<int> dist = bfs_distances(r.pose.point(), observed_);
            int here = observed_.grid.index(r.pose.point());
            for (const FrontierCluster& c : clusters) {
                if (c.rep != here && dist[static_cast<std::size_t>(c.rep)] >= 0) {
                    result_.stall_events += 1;
                    break;
                }
            }
        }
    }

    EpisodeConfig cfg_;
    const SceneSpec& scene_;
    ObservedMap observed_;
    std::vector<RobotState> robots_;
    std::vector<GridPoint> last_positions_;
    EpisodeResult result_;
    AreaGraph prev_graph_;
    std::string prev_summary_;
    std::unique_ptr<RoomPlanner> planner_;
    int denominator_ = 1;
    int revealed_countable_ = 0;
    int cycle_index_ = 0;
    int cluster_cache_step_ = -1;
    std::vector<FrontierCluster> cached_clusters_;
};

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg) {
    EpisodeRunner runner(cfg);
    return runner.run();
}

std::string classify_scale(int accessible_free_cells, const ScaleThresholds& t) {
    if (accessible_free_cells <= t.small_max_free) return "small";
    if (accessible_free_cells <= t.medium_max_free) return "medium";
    return "large";
}

EpisodeSummary summarize_episode(const EpisodeConfig& cfg, const EpisodeResult& result) {
    EpisodeSummary s;
    s.strategy = strategy_name(cfg.strategy);
    if (cfg.ablation.no_neighbors) s.strategy += "+no_neighbors";
    if (cfg.ablation.no_summary) s.strategy += "+no_summary";
    if (cfg.ablation.no_target) s.strategy += "+no_target";
    s.scale = classify_scale(static_cast<int>(cfg.scenario.scene->accessible_free_cells().size()));
    s.task = task_name(cfg.scenario.task);
    s.steps = result.steps;
    s.completed = result.completed;
    if (!result.cycles.empty()) {
        double total = 0.0;
        for (const CycleRecord& c : result.cycles) total += c.planner_latency_s;
        s.planner_latency_mean_s = total / static_cast<double>(result.cycles.size());
    }
    return s;
}

std::vector<MetricsRow> compute_metrics(const std::vector<EpisodeSummary>& episodes) {
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<const EpisodeSummary*>> groups;
    for (const EpisodeSummary& e : episodes) groups[{e.strategy, e.scale, e.task}].push_back(&e);

    std::vector<MetricsRow> rows;
    for (const auto& [key, members] : groups) {
        MetricsRow row;
        row.strategy = std::get<0>(key);
        row.scale = std::get<1>(key);
        row.task = std::get<2>(key);
        row.episodes = static_cast<int>(members.size());
        double sum = 0.0, latency = 0.0;
        int ok = 0;
        for (const EpisodeSummary* e : members) {
            sum += e->steps;
            latency += e->planner_latency_mean_s;
            if (e->completed) ++ok;
        }
        row.mean_steps = sum / row.episodes;
        double var = 0.0;
        for (const EpisodeSummary* e : members) {
            double d = e->steps - row.mean_steps;
            var += d * d;
        }
        row.sd_steps = row.episodes > 1 ? std::sqrt(var / (row.episodes - 1)) : 0.0;
        row.success_rate = static_cast<double>(ok) / row.episodes;
        row.mean_planner_latency_s = latency / row.episodes;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sagr
