#pragma once

#include <stdexcept>
#include <string>

namespace sagr {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleScenario : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoReachableFreeCell : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// LLM endpoint exhausted its retries; callers degrade to the rule planner.
struct PlannerUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sagr
