#pragma once

#include <optional>
#include <vector>

#include "sagr/frontier.hpp"
#include "sagr/sensing.hpp"

namespace sagr {

enum class RobotStatus { Navigating, Idle, Blocked };

// A queued navigation goal: the cluster representative plus the member cells
// it stood for, kept so the executor can tell when the goal went stale.
struct QueuedWaypoint {
    int rep = -1;
    std::vector<int> cells;
};

struct RobotState {
    int id = 0;
    Pose pose;
    int v_max = 1;  // cells per step
    std::vector<QueuedWaypoint> waypoint_queue;  // goals still to visit
    std::vector<GridPoint> path;  // cells to the current waypoint; path[path_pos] == current cell
    std::size_t path_pos = 0;
    RobotStatus status = RobotStatus::Idle;
    int blocked_steps = 0;
    int stuck_steps = 0;             // consecutive steps without displacement while tasked
    int last_target = -1;            // rep of the waypoint currently pursued
    std::vector<int> target_cells;   // frontier cells backing the pursued waypoint
    int avoid_target = -1;  // contested rep a jam forced the robot off; armed until it next arrives anywhere

    bool has_active_path() const { return !path.empty() && path_pos + 1 < path.size(); }
};

// Shortest 4-connected path over observed free cells (A* with Manhattan
// heuristic, ties toward lower cell index). Unknown and occupied cells are
// non-traversable. nullopt when unreachable.
std::optional<std::vector<GridPoint>> plan_path(GridPoint from, GridPoint to,
                                                const ObservedMap& observed);

// BFS hop distances from `from` over observed free cells; -1 unreachable.
std::vector<int> bfs_distances(GridPoint from, const ObservedMap& observed);

// Advances every robot along its path in id order, at most v_max cells each.
// A move that would bring a robot within d_safe of any other robot's
// reference position (new if already moved, current otherwise) truncates at
// the last safe cell; headings face the movement direction.
void step_robots(std::vector<RobotState>& robots, const ObservedMap& observed, double d_safe);

// Cluster with the minimum plan_path length from `pose`; nullopt when no
// cluster representative is reachable. Ties toward the lower cluster index.
std::optional<std::size_t> nearest_reachable_frontier(const Pose& pose, const ObservedMap& observed,
                                                      const std::vector<FrontierCluster>& clusters);

}  // namespace sagr
