#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sagr/areagraph.hpp"
#include "sagr/errors.hpp"

namespace sagr {

struct AblationFlags {
    bool no_neighbors = false;  // drop adjacency lists from the serialized graph
    bool no_summary = false;    // drop the previous plan summary
    bool no_target = false;     // drop the target room type
};

struct PlannerInput {
    std::string graph_text;
    std::string prev_summary;
    Task task = Task::Explore;
    std::optional<std::string> target_room_type;
    std::vector<int> robot_ids;
    AblationFlags ablation;
};

// The planner layer's two outputs: a robot -> room mapping and a short plan
// summary carried into the next cycle's prompt. free_explore is the sentinel
// for "no labeled rooms yet": downstream behaves as global nearest-frontier.
struct RoomAssignment {
    std::map<int, std::string> mapping;
    std::string summary;
    bool free_explore = false;
};

inline constexpr std::size_t kSummaryMaxChars = 400;

struct EndpointConfig {
    std::string base_url;  // falls back to SAGR_BASE_URL, then localhost:8080
    std::string model = "gpt-4o";
    double temperature = 0.2;
    int max_tokens = 1000;
    double timeout_s = 30.0;
    int retries = 2;
    std::string api_key;  // from SAGR_API_KEY when empty
};

struct Violation {
    enum class Kind { MissingRobot, DuplicateRobot, UnknownRoom, UnknownRobot, MissingSummary };
    Kind kind;
    std::string message;
};

// Exactly-once robot coverage and room existence. Violations are data for the
// retry correction prompt, not failures.
std::vector<Violation> validate_assignment(const std::vector<std::pair<int, std::string>>& raw,
                                           const AreaGraph& graph, const std::vector<int>& robot_ids);

// Everything a planner may consult for one coordination cycle.
struct PlannerContext {
    PlannerInput input;
    const AreaGraph* graph = nullptr;
    const ObservedMap* observed = nullptr;
    const std::vector<FrontierCluster>* clusters = nullptr;
    std::vector<Pose> robot_poses;  // indexed by robot id
    const LabelSet* labels = nullptr;
};

// Per-cycle planner telemetry for the episode record.
struct PlanTelemetry {
    std::string prompt;
    std::string response;
    int retries = 0;
    bool fallback_used = false;
    double latency_s = 0.0;
};

class RoomPlanner {
public:
    virtual ~RoomPlanner() = default;
    // Returns a valid RoomAssignment or the free-explore sentinel; throws
    // PlannerUnavailable when an endpoint exhausts its retries.
    virtual RoomAssignment plan(const PlannerContext& ctx, PlanTelemetry& telemetry) = 0;
};

// Deterministic surrogate: ranks rooms by (target-type match, total frontier
// size, id), assigns robots greedily in id order under capacity
// ceil(M / rooms), restricted to rooms with a reachable frontier entry.
// The previous summary encodes the prior mapping and acts as hysteresis:
// a robot keeps its old room while that room stays in the same priority tier.
RoomAssignment rule_plan(const PlannerContext& ctx);

class RulePlanner final : public RoomPlanner {
public:
    RoomAssignment plan(const PlannerContext& ctx, PlanTelemetry& telemetry) override;
};

struct ChatMessage {
    std::string role;  // "system", "user", "assistant"
    std::string content;
};

// One chat-completions exchange; implementations: HTTP endpoint, scripted replay.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    struct Result {
        bool ok = false;
        std::string content;
        std::string error;
    };
    virtual Result complete(const std::vector<ChatMessage>& messages, const EndpointConfig& cfg) = 0;
};

std::unique_ptr<ChatTransport> make_http_transport();
// Replays responses from a script file: blocks separated by lines of "---";
// a block consisting of "TIMEOUT" simulates a transport timeout. The last
// block repeats once the script is exhausted.
std::unique_ptr<ChatTransport> make_script_transport(const std::string& script_path);

// Prompt construction and response-grammar parsing are pure and reused by the
// mock planner and the tests. The response grammar is a fenced block of
// "ASSIGN <robot> <room>" lines plus one "SUMMARY: ..." line.
std::string build_system_prompt();
std::string build_user_prompt(const PlannerInput& input);
struct ParsedResponse {
    std::vector<std::pair<int, std::string>> mapping;
    std::optional<std::string> summary;
    bool parse_ok = false;
    std::string parse_error;
};
ParsedResponse parse_response(const std::string& text);

// Endpoint-backed planner: build prompt, call transport, parse, validate;
// on failure retry with an appended correction instruction up to cfg.retries,
// then throw PlannerUnavailable.
class LlmPlanner final : public RoomPlanner {
public:
    LlmPlanner(std::unique_ptr<ChatTransport> transport, EndpointConfig cfg);
    RoomAssignment plan(const PlannerContext& ctx, PlanTelemetry& telemetry) override;

private:
    std::unique_ptr<ChatTransport> transport_;
    EndpointConfig cfg_;
};

}  // namespace sagr
