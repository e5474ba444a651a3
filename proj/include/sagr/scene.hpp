#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sagr/errors.hpp"
#include "sagr/grid.hpp"

namespace sagr {

enum class Task { Explore, Search };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

// Ground-truth environment: fully labeled grid plus scene metadata.
// Immutable after construction; shared read-only across episodes.
struct SceneSpec {
    SemanticGrid grid;
    LabelSet labels;
    std::set<int> inaccessible;  // free cells unreachable from the main free component
    std::string name;

    // Free cells excluding the inaccessible set (the main connected component).
    std::vector<int> accessible_free_cells() const;
    // Cells counted toward the coverage denominator: every non-Unknown truth
    // cell not listed inaccessible.
    int coverage_denominator() const;
};

struct ScenarioConfig {
    std::shared_ptr<const SceneSpec> scene;
    std::vector<Pose> robot_starts;
    int target_cell = -1;  // -1 when the task is pure exploration
    std::string target_room_type;
    Task task = Task::Explore;
    unsigned seed = 0;
};

struct GenParams {
    int rooms = 6;
    int room_min = 5;  // interior side length range, cells
    int room_max = 9;
    int corridor_width = 3;
    std::vector<std::string> label_names = default_label_names();
    unsigned seed = 0;
};

// Line-oriented scene text format:
//   header "W H RES", then H rows of W single-char tokens
//   ('#' occupied, '.' unknown hole, letter = labeled free cell),
//   then "LEGEND <char>=<label> ..." as the last line.
// A JSON sidecar at <path>.json carries {name, inaccessible:[...]}.
SceneSpec load_scene(const std::string& path,
                     const std::vector<std::string>& allowed_labels = default_label_names());
void save_scene(const SceneSpec& scene, const std::string& path);

// Apartment-like layout: rejection-sampled axis-aligned rooms joined by
// hallway corridors; every free cell mutually reachable; deterministic per seed.
SceneSpec generate_scene(const GenParams& params);

// Randomly samples spaced robot start poses and (for Search) a target cell of
// the requested room type. Deterministic per seed.
ScenarioConfig sample_scenario(std::shared_ptr<const SceneSpec> scene, int robots,
                               const std::string& target_room_type, unsigned seed,
                               Task task = Task::Search, double d_safe = 2.0);

// Validation shared by the loader and the generator; throws ValidationError.
void validate_scene(const SceneSpec& scene);

}  // namespace sagr
