// Copyright 2026 The coassembly Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coassembly/scenario.hpp"

#include <fstream>

#include "coassembly/error.hpp"

namespace coassembly::sim {

using nlohmann::json;

SimTime LatencyDist::draw(RandomStream& rng) const {
    if (kind == Kind::Constant) return min;
    return rng.uniform(min, max);
}

LatencyDist LatencyDist::from_json(const json& j) {
    if (j.is_number()) return constant(from_seconds(j.get<double>()));
    if (j.contains("constant")) return constant(from_seconds(j.at("constant").get<double>()));
    const auto& u = j.at("uniform");
    if (!u.is_array() || u.size() != 2) throw Error(Errc::InvalidScenario, "uniform latency needs [min, max]");
    return {Kind::Uniform, from_seconds(u[0].get<double>()), from_seconds(u[1].get<double>())};
}

json LatencyDist::to_json() const {
    if (kind == Kind::Constant) return {{"constant", to_seconds(min)}};
    return {{"uniform", {to_seconds(min), to_seconds(max)}}};
}

namespace {

const std::map<std::string, PolicyEntry>& builtin_policy() {
    static const std::map<std::string, PolicyEntry> table{
        {"request:tool", {"none", "give me the {label}", false}},
        {"request:component", {"none", "bring the {label}", false}},
        {"hold", {"none", "hold the {label}", false}},
        {"slot", {"response", "the {label}", false}},
        {"prompt", {"response", "yes", false}},
        {"clarify", {"response", "{last}", false}},
        {"fault", {"fault_notice", "reset", true}},
        {"next", {"observe", "next", false}},
    };
    return table;
}

std::string generic_key(const std::string& key) {
    const auto colon = key.find(':');
    if (key.rfind("request:", 0) == 0) return key;
    return colon == std::string::npos ? key : key.substr(0, colon);
}

}  // namespace

PolicyEntry OperatorProfile::lookup(const std::vector<std::string>& keys) const {
    for (const auto& k : keys) {
        if (auto it = policy.find(k); it != policy.end()) return it->second;
    }
    for (const auto& k : keys) {
        if (auto it = builtin_policy().find(k); it != builtin_policy().end()) return it->second;
        if (auto it = builtin_policy().find(generic_key(k)); it != builtin_policy().end()) return it->second;
    }
    return {};
}

const LatencyDist* OperatorProfile::latency(const std::string& name) const {
    if (name == "response") return &response;
    if (name == "observe") return &observe;
    if (name == "fault_notice") return &fault_notice;
    return nullptr;
}

std::shared_ptr<const assembly::AssemblyPlan> load_valid_plan(const std::filesystem::path& path) {
    auto plan = std::make_shared<assembly::AssemblyPlan>(assembly::AssemblyPlan::load(path));
    const auto errors = assembly::validate_plan(*plan);
    if (!errors.empty()) {
        std::vector<std::string> problems;
        for (const auto& e : errors) problems.push_back(std::string{to_string(e.code)} + ": " + e.message);
        throw Error(Errc::InvalidPlan, problems);
    }
    return plan;
}

std::vector<std::string> ScenarioConfig::check() const {
    std::vector<std::string> problems;
    if (max_time <= SimTime::zero()) problems.emplace_back("max_time must be positive");
    if (!plan) problems.emplace_back("no plan loaded");
    if (!conversational_script) problems.emplace_back("no conversational script loaded");
    if (!baseline_script) problems.emplace_back("no baseline script loaded");
    if (baseline_script) {
        if (baseline_script->has_robot_initiated_dialogues())
            problems.emplace_back("baseline script must not contain robot-initiated (api) dialogues");
        if (baseline_script->has_required_slots())
            problems.emplace_back("baseline script must not contain multi-turn slot prompts");
        if (!baseline_script->event_rules().empty()) problems.emplace_back("baseline script must not contain event rules");
    }
    if (!(op.speed_factor > 0.0)) problems.emplace_back("operator speed_factor must be positive");
    if (op.recovery_work < SimTime::zero()) problems.emplace_back("operator recovery_work must not be negative");
    for (const auto* d : {&op.response, &op.observe, &op.fault_notice}) {
        if (d->min < SimTime::zero() || d->max < d->min) problems.emplace_back("latency bounds must satisfy 0 <= min <= max");
    }
    for (const auto& [key, entry] : op.policy) {
        if (entry.latency != "none" && op.latency(entry.latency) == nullptr)
            problems.push_back("policy '" + key + "' names unknown latency '" + entry.latency + "'");
    }
    for (const auto t : {robot.fetch_tool, robot.deliver_component, robot.reset}) {
        if (t <= SimTime::zero()) problems.emplace_back("robot action durations must be positive");
    }
    for (auto& p : robot.failures.check()) problems.push_back(std::move(p));
    return problems;
}

ScenarioConfig ScenarioConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    ScenarioConfig c;
    std::vector<std::string> problems;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path{p};
        return path.is_absolute() ? path : base_dir / path;
    };
    try {
        if (j.value("version", 0) != kScenarioVersion)
            throw Error(Errc::InvalidScenario, "scenario version must be " + std::to_string(kScenarioVersion));
        c.name = j.value("name", std::string{"scenario"});
        c.mode = parse_mode(j.value("mode", std::string{"conversational"}));
        c.seed = j.value("seed", std::uint64_t{0});
        c.max_time = from_seconds(j.value("max_time", 3600.0));
        c.communication = j.value("communication", true);
        c.plan_path = resolve(j.at("plan").get<std::string>());
        c.script_path = resolve(j.at("script").get<std::string>());
        c.baseline_script_path = resolve(j.at("baseline_script").get<std::string>());

        if (auto it = j.find("operator"); it != j.end()) {
            const auto& o = *it;
            if (o.contains("response")) c.op.response = LatencyDist::from_json(o["response"]);
            if (o.contains("observe")) c.op.observe = LatencyDist::from_json(o["observe"]);
            if (o.contains("fault_notice")) c.op.fault_notice = LatencyDist::from_json(o["fault_notice"]);
            c.op.recovery_work = from_seconds(o.value("recovery_work", 0.0));
            c.op.speed_factor = o.value("speed_factor", 1.0);
            if (auto p = o.find("policy"); p != o.end()) {
                for (const auto& [key, v] : p->items()) {
                    PolicyEntry e;
                    e.latency = v.value("latency", std::string{"none"});
                    e.say = v.value("say", std::string{});
                    e.recover = v.value("recover", false);
                    c.op.policy[key] = e;
                }
            }
        }
        if (auto it = j.find("robot"); it != j.end()) {
            const auto& r = *it;
            if (auto d = r.find("durations"); d != r.end()) {
                c.robot.fetch_tool = from_seconds(d->value("fetch_tool", to_seconds(c.robot.fetch_tool)));
                c.robot.deliver_component =
                    from_seconds(d->value("deliver_component", to_seconds(c.robot.deliver_component)));
                c.robot.reset = from_seconds(d->value("reset", to_seconds(c.robot.reset)));
            }
            if (auto f = r.find("failures"); f != r.end()) {
                if (auto p = f->find("probabilities"); p != f->end()) {
                    for (const auto& [kind, prob] : p->items()) {
                        auto k = robot::parse_action_kind(kind);
                        if (!k) throw Error(Errc::InvalidScenario, "unknown action kind '" + kind + "'");
                        c.robot.failures.probability[*k] = prob.get<double>();
                    }
                }
                if (auto s = f->find("schedule"); s != f->end()) {
                    for (const auto& entry : *s) {
                        robot::ScheduledFailure sf;
                        sf.at = from_seconds(entry.at("t").get<double>());
                        if (entry.contains("reason")) {
                            auto reason = robot::parse_failure_reason(entry["reason"].get<std::string>());
                            if (!reason) throw Error(Errc::InvalidScenario, "unknown failure reason " + entry["reason"].dump());
                            sf.reason = reason;
                        }
                        c.robot.failures.schedule.push_back(sf);
                    }
                }
            }
        }
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidScenario, std::string{"malformed scenario: "} + e.what());
    }
    c.robot.failures.seed = c.seed;

    c.plan = load_valid_plan(c.plan_path);
    c.conversational_script =
        std::make_shared<const dialogue::ConversationScript>(dialogue::ConversationScript::load(c.script_path));
    c.baseline_script =
        std::make_shared<const dialogue::ConversationScript>(dialogue::ConversationScript::load(c.baseline_script_path));

    problems = c.check();
    if (!problems.empty()) throw Error(Errc::InvalidScenario, problems);
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open scenario " + path.string());
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidScenario, path.string() + " is not valid JSON");
    return from_json(j, path.parent_path());
}

json ScenarioConfig::to_json() const {
    json policy = json::object();
    for (const auto& [k, e] : op.policy) policy[k] = {{"latency", e.latency}, {"say", e.say}, {"recover", e.recover}};
    json probs = json::object();
    for (const auto& [k, p] : robot.failures.probability) probs[std::string{robot::to_string(k)}] = p;
    json schedule = json::array();
    for (const auto& s : robot.failures.schedule) {
        json e{{"t", to_seconds(s.at)}};
        if (s.reason) e["reason"] = robot::to_string(*s.reason);
        schedule.push_back(e);
    }
    return {
        {"version", kScenarioVersion},
        {"name", name},
        {"mode", to_string(mode)},
        {"seed", seed},
        {"max_time", to_seconds(max_time)},
        {"communication", communication},
        {"plan", plan_path.string()},
        {"script", script_path.string()},
        {"baseline_script", baseline_script_path.string()},
        {"operator",
         {{"response", op.response.to_json()},
          {"observe", op.observe.to_json()},
          {"fault_notice", op.fault_notice.to_json()},
          {"recovery_work", to_seconds(op.recovery_work)},
          {"speed_factor", op.speed_factor},
          {"policy", policy}}},
        {"robot",
         {{"durations",
           {{"fetch_tool", to_seconds(robot.fetch_tool)},
            {"deliver_component", to_seconds(robot.deliver_component)},
            {"reset", to_seconds(robot.reset)}}},
          {"failures", {{"probabilities", probs}, {"schedule", schedule}}}}},
    };
}

}  // namespace coassembly::sim
