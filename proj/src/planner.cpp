#include "sagr/planner.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sagr/navigation.hpp"

namespace sagr {

namespace {

std::string truncate_summary(std::string s) {
    if (s.size() > kSummaryMaxChars) s.resize(kSummaryMaxChars);
    return s;
}

RoomAssignment free_explore_sentinel() {
    RoomAssignment a;
    a.free_explore = true;
    a.summary = "free-explore";
    return a;
}

// "r<id>->R<n>" tokens out of a rule-plan summary; the hysteresis source.
std::map<int, std::string> parse_summary_mapping(const std::string& summary) {
    std::map<int, std::string> out;
    std::istringstream in(summary);
    std::string tok;
    while (in >> tok) {
        auto arrow = tok.find("->");
        if (arrow == std::string::npos || tok.empty() || tok[0] != 'r') continue;
        std::string left = tok.substr(1, arrow - 1);
        std::string right = tok.substr(arrow + 2);
        if (left.empty() || right.empty()) continue;
        if (!std::all_of(left.begin(), left.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            continue;
        out[std::stoi(left)] = right;
    }
    return out;
}

}  // namespace

std::vector<Violation> validate_assignment(const std::vector<std::pair<int, std::string>>& raw,
                                           const AreaGraph& graph, const std::vector<int>& robot_ids) {
    std::vector<Violation> out;
    std::map<int, int> seen;
    for (const auto& [robot, room] : raw) {
        seen[robot] += 1;
        if (std::find(robot_ids.begin(), robot_ids.end(), robot) == robot_ids.end())
            out.push_back({Violation::Kind::UnknownRobot,
                           "robot r" + std::to_string(robot) + " is not part of the team"});
        if (!graph.nodes.count(room))
            out.push_back({Violation::Kind::UnknownRoom, "room " + room + " does not exist in the graph"});
    }
    for (const auto& [robot, count] : seen)
        if (count > 1)
            out.push_back({Violation::Kind::DuplicateRobot,
                           "robot r" + std::to_string(robot) + " assigned " + std::to_string(count) + " times"});
    for (int id : robot_ids)
        if (!seen.count(id))
            out.push_back({Violation::Kind::MissingRobot, "robot r" + std::to_string(id) + " has no assignment"});
    return out;
}

RoomAssignment rule_plan(const PlannerContext& ctx) {
    const AreaGraph& graph = *ctx.graph;
    if (graph.empty()) return free_explore_sentinel();

    const PlannerInput& input = ctx.input;
    const int m = static_cast<int>(input.robot_ids.size());
    const int capacity = (m + static_cast<int>(graph.nodes.size()) - 1) / static_cast<int>(graph.nodes.size());

    std::optional<LabelId> target;
    if (input.task == Task::Search && input.target_room_type && !input.ablation.no_target && ctx.labels)
        target = ctx.labels->find(*input.target_room_type);

    struct Ranked {
        int tier;        // 0 = matches target type
        int frontier;    // total frontier cells
        std::string id;
    };
    std::vector<Ranked> ranked;
    int tier0_rooms = 0;
    for (const auto& [id, node] : graph.nodes) {
        int tier = target && node.type == *target ? 0 : 1;
        if (tier == 0) ++tier0_rooms;
        ranked.push_back({tier, node.frontier_cell_total, id});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.tier != b.tier) return a.tier < b.tier;
        if (a.frontier != b.frontier) return a.frontier > b.frontier;
        return a.id < b.id;
    });
    // Spatial diversity is maintained within the prioritized class: matching
    // rooms split the team among themselves, so a sighted target-type room
    // draws several robots instead of one.
    const int tier0_capacity = tier0_rooms > 0 ? (m + tier0_rooms - 1) / tier0_rooms : capacity;

    // Per-robot BFS distances to room frontier representatives: reachability
    // gates every choice, hop counts drive the summary's locality carry-over.
    std::map<std::string, std::vector<int>> room_reps;
    if (ctx.clusters)
        for (const auto& [id, node] : graph.nodes)
            for (int ci : node.frontier_clusters)
                room_reps[id].push_back((*ctx.clusters)[static_cast<std::size_t>(ci)].rep);
    auto room_distances = [&](int robot) {
        std::map<std::string, int> hops;  // -1 unreachable
        if (!ctx.observed || robot >= static_cast<int>(ctx.robot_poses.size())) {
            for (const auto& [id, node] : graph.nodes) hops[id] = 0;
            return hops;
        }
        std::vector<int> dist = bfs_distances(ctx.robot_poses[static_cast<std::size_t>(robot)].point(),
                                              *ctx.observed);
        for (const auto& [id, node] : graph.nodes) {
            int best = -1;
            auto reps = room_reps.find(id);
            if (reps != room_reps.end())
                for (int rep : reps->second) {
                    int d = dist[static_cast<std::size_t>(rep)];
                    if (d >= 0 && (best < 0 || d < best)) best = d;
                }
            hops[id] = best;
        }
        return hops;
    };

    std::map<int, std::string> prev;
    if (!input.ablation.no_summary && !input.prev_summary.empty())
        prev = parse_summary_mapping(input.prev_summary);

    // Room each robot currently stands in, straight from the graph attributes.
    std::map<int, std::string> standing;
    for (const auto& [id, node] : graph.nodes)
        for (int robot : node.robots) standing[robot] = id;

    RoomAssignment out;
    std::map<std::string, int> load;
    for (int robot : input.robot_ids) {
        auto hops = room_distances(robot);
        auto ok = [&](const std::string& id) { return hops[id] >= 0; };

        // Best tier still offering capacity: an open slot in a target-type
        // room pulls exactly one robot per slot; everyone else keeps working.
        int best_tier = 2;
        for (const Ranked& r : ranked)
            if (ok(r.id) && load[r.id] < (r.tier == 0 ? tier0_capacity : capacity))
                best_tier = std::min(best_tier, r.tier);
        if (best_tier == 2)
            for (const Ranked& r : ranked)
                if (ok(r.id)) best_tier = std::min(best_tier, r.tier);
        bool hunting = target && best_tier == 0;

        auto tier_of = [&](const std::string& id) {
            return target && graph.nodes.at(id).type == *target ? 0 : 1;
        };
        auto cap_of = [&](const std::string& id) { return tier_of(id) == 0 ? tier0_capacity : capacity; };
        auto keepable = [&](const std::string& id) {
            return graph.nodes.count(id) && ok(id) && load[id] < cap_of(id) && tier_of(id) <= best_tier;
        };

        std::string chosen;
        // Cross-cycle consistency, strongest claim first: the room the robot
        // stands in (visible in the graph even without a summary), then the
        // room the previous plan assigned. An open target-type slot overrides
        // both so the hunt starts immediately.
        if (auto it = standing.find(robot); it != standing.end() && keepable(it->second))
            chosen = it->second;
        if (chosen.empty() && !hunting)
            if (auto it = prev.find(robot); it != prev.end() && keepable(it->second)) chosen = it->second;
        // A summary-carrying robot whose room is done rolls into the nearest
        // room with capacity, exploration-style; while hunting it falls
        // through to the ranking instead, chasing matching rooms first and
        // the largest unexplored mass otherwise.
        if (chosen.empty() && !hunting && prev.count(robot)) {
            // Local continuation only pays while the next room is genuinely
            // nearby; long hauls go through the ranking like everyone else.
            constexpr int kLocalHops = 25;
            int best_d = -1;
            for (const Ranked& r : ranked) {
                if (!ok(r.id) || hops[r.id] > kLocalHops || load[r.id] >= cap_of(r.id)) continue;
                if (best_d < 0 || hops[r.id] < best_d) {
                    best_d = hops[r.id];
                    chosen = r.id;
                }
            }
        }
        if (chosen.empty())
            for (const Ranked& r : ranked)
                if (ok(r.id) && load[r.id] < cap_of(r.id)) { chosen = r.id; break; }
        if (chosen.empty())
            for (const Ranked& r : ranked)
                if (ok(r.id)) { chosen = r.id; break; }
        if (chosen.empty()) chosen = ranked.front().id;

        out.mapping[robot] = chosen;
        load[chosen] += 1;
    }

    std::ostringstream summary;
    summary << "plan:";
    for (const auto& [robot, room] : out.mapping) summary << " r" << robot << "->" << room;
    summary << " focus=" << (target ? *input.target_room_type : std::string("explore"));
    out.summary = truncate_summary(summary.str());
    return out;
}

RoomAssignment RulePlanner::plan(const PlannerContext& ctx, PlanTelemetry& telemetry) {
    telemetry.prompt = build_system_prompt() + "\n---\n" + build_user_prompt(ctx.input);
    return rule_plan(ctx);
}

std::string build_system_prompt() {
    return "You coordinate an indoor robot team. The user lists discovered rooms (id, type, "
           "frontier stats, robots, adjacency). Assign every robot to exactly one room id. Prefer "
           "rooms with more frontier cells; on search tasks prefer the target type; spread robots "
           "out. Reply in a fenced block: one 'ASSIGN <robot> <room>' line per robot, then "
           "'SUMMARY: <short note>'.";
}

std::string build_user_prompt(const PlannerInput& input) {
    std::ostringstream out;
    out << input.graph_text;
    if (!input.ablation.no_summary && !input.prev_summary.empty())
        out << "PREVIOUS PLAN: " << input.prev_summary << '\n';
    out << "TASK: " << task_name(input.task) << '\n';
    if (input.target_room_type && !input.ablation.no_target)
        out << "TARGET ROOM TYPE: " << *input.target_room_type << '\n';
    out << "ROBOTS:";
    for (std::size_t i = 0; i < input.robot_ids.size(); ++i)
        out << (i ? "," : " ") << input.robot_ids[i];
    out << '\n';
    return out.str();
}

ParsedResponse parse_response(const std::string& text) {
    ParsedResponse out;
    // Restrict to the first fenced block when one exists.
    std::string body = text;
    auto fence = text.find("```");
    if (fence != std::string::npos) {
        auto line_end = text.find('\n', fence);
        auto close = line_end == std::string::npos ? std::string::npos : text.find("```", line_end);
        if (line_end != std::string::npos && close != std::string::npos)
            body = text.substr(line_end + 1, close - line_end - 1);
    }

    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "ASSIGN") {
            std::string robot_tok, room;
            if (!(ls >> robot_tok >> room)) {
                out.parse_error = "malformed ASSIGN line: " + line;
                return out;
            }
            if (!robot_tok.empty() && robot_tok[0] == 'r') robot_tok.erase(0, 1);
            try {
                out.mapping.push_back({std::stoi(robot_tok), room});
            } catch (const std::exception&) {
                out.parse_error = "non-numeric robot id in: " + line;
                return out;
            }
        } else if (head.rfind("SUMMARY:", 0) == 0) {
            std::string rest = line.substr(line.find("SUMMARY:") + 8);
            while (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
            out.summary = rest;
        }
    }
    if (out.mapping.empty()) {
        out.parse_error = "no ASSIGN lines found";
        return out;
    }
    out.parse_ok = true;
    return out;
}

namespace {

class HttpTransport final : public ChatTransport {
public:
    Result complete(const std::vector<ChatMessage>& messages, const EndpointConfig& cfg) override {
        std::string base = cfg.base_url;
        if (base.empty())
            if (const char* env = std::getenv("SAGR_BASE_URL")) base = env;
        if (base.empty()) base = "http://localhost:8080";
        std::string host = base, prefix;
        auto scheme = base.find("://");
        auto path = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (path != std::string::npos) {
            host = base.substr(0, path);
            prefix = base.substr(path);
        }
        if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

        std::string key = cfg.api_key;
        if (key.empty())
            if (const char* env = std::getenv("SAGR_API_KEY")) key = env;

        nlohmann::json body;
        body["model"] = cfg.model;
        body["temperature"] = cfg.temperature;
        body["max_tokens"] = cfg.max_tokens;
        body["messages"] = nlohmann::json::array();
        for (const ChatMessage& m : messages)
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});

        httplib::Client client(host);
        auto timeout = std::chrono::milliseconds(static_cast<long>(cfg.timeout_s * 1000.0));
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        httplib::Headers headers;
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

        auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
        if (!res) return {false, "", "transport error: " + httplib::to_string(res.error())};
        if (res->status != 200)
            return {false, "", "HTTP " + std::to_string(res->status) + ": " + res->body};
        try {
            nlohmann::json j = nlohmann::json::parse(res->body);
            return {true, j.at("choices").at(0).at("message").at("content").get<std::string>(), ""};
        } catch (const std::exception& e) {
            return {false, "", std::string("unparseable completion body: ") + e.what()};
        }
    }
};

class ScriptTransport final : public ChatTransport {
public:
    explicit ScriptTransport(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open mock planner script: " + path);
        std::string line, block;
        auto flush = [&] {
            while (!block.empty() && block.back() == '\n') block.pop_back();
            blocks_.push_back(block);
            block.clear();
        };
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line == "---") flush();
            else block += line + '\n';
        }
        flush();
        if (blocks_.empty()) throw ConfigError("mock planner script is empty: " + path);
    }

    Result complete(const std::vector<ChatMessage>&, const EndpointConfig&) override {
        const std::string& block = blocks_[std::min(next_, blocks_.size() - 1)];
        if (next_ < blocks_.size()) ++next_;
        std::string trimmed = block;
        while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\n')) trimmed.pop_back();
        if (trimmed == "TIMEOUT") return {false, "", "transport error: simulated timeout"};
        return {true, block, ""};
    }

private:
    std::vector<std::string> blocks_;
    std::size_t next_ = 0;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport() { return std::make_unique<HttpTransport>(); }

std::unique_ptr<ChatTransport> make_script_transport(const std::string& script_path) {
    return std::make_unique<ScriptTransport>(script_path);
}

LlmPlanner::LlmPlanner(std::unique_ptr<ChatTransport> transport, EndpointConfig cfg)
    : transport_(std::move(transport)), cfg_(std::move(cfg)) {}

RoomAssignment LlmPlanner::plan(const PlannerContext& ctx, PlanTelemetry& telemetry) {
    if (ctx.graph->empty()) {
        telemetry.prompt = build_system_prompt() + "\n---\n" + build_user_prompt(ctx.input);
        return free_explore_sentinel();
    }

    std::vector<ChatMessage> messages{{"system", build_system_prompt()},
                                      {"user", build_user_prompt(ctx.input)}};
    telemetry.prompt = messages[0].content + "\n---\n" + messages[1].content;

    std::string last_error;
    const int attempts = cfg_.retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) telemetry.retries += 1;
        ChatTransport::Result res = transport_->complete(messages, cfg_);
        if (!res.ok) {
            last_error = res.error;
            continue;
        }
        telemetry.response = res.content;

        ParsedResponse parsed = parse_response(res.content);
        std::vector<Violation> violations;
        if (!parsed.parse_ok) {
            last_error = parsed.parse_error;
        } else {
            violations = validate_assignment(parsed.mapping, *ctx.graph, ctx.input.robot_ids);
            if (!parsed.summary)
                violations.push_back({Violation::Kind::MissingSummary, "missing SUMMARY line"});
            if (violations.empty()) {
                RoomAssignment out;
                for (const auto& [robot, room] : parsed.mapping) out.mapping[robot] = room;
                out.summary = truncate_summary(*parsed.summary);
                return out;
            }
            std::ostringstream err;
            for (const Violation& v : violations) err << v.message << "; ";
            last_error = err.str();
        }

        std::ostringstream correction;
        correction << "Your previous reply was invalid (" << last_error
                   << "). Reply again with exactly one 'ASSIGN <robot> <room>' line per robot, "
                      "using only room ids from the graph, followed by one 'SUMMARY:' line, "
                      "inside a fenced code block.";
        messages.push_back({"assistant", res.content});
        messages.push_back({"user", correction.str()});
    }
    throw PlannerUnavailable("planner endpoint exhausted " + std::to_string(cfg_.retries) +
                             " retries: " + last_error);
}

}  // namespace sagr
