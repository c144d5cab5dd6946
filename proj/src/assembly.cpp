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

#include "coassembly/assembly.hpp"

#include <algorithm>
#include <fstream>

#include "coassembly/error.hpp"

namespace coassembly::assembly {

std::string_view to_string(Actor a) {
    switch (a) {
        case Actor::Human: return "human";
        case Actor::Robot: return "robot";
        case Actor::Joint: return "joint";
    }
    return "human";
}

std::string_view to_string(ItemKind k) { return k == ItemKind::Tool ? "tool" : "component"; }

std::string_view to_string(Location l) {
    switch (l) {
        case Location::Storage: return "storage";
        case Location::SharedBench: return "shared-bench";
        case Location::HumanHand: return "human-hand";
        case Location::RobotGripper: return "robot-gripper";
    }
    return "storage";
}

std::string_view to_string(StepStatus s) {
    switch (s) {
        case StepStatus::Pending: return "pending";
        case StepStatus::Ready: return "ready";
        case StepStatus::Active: return "active";
        case StepStatus::Done: return "done";
        case StepStatus::Failed: return "failed";
    }
    return "pending";
}

std::string_view to_string(PlanErrc e) {
    switch (e) {
        case PlanErrc::CyclicPrecedence: return "CyclicPrecedence";
        case PlanErrc::UnknownItem: return "UnknownItem";
        case PlanErrc::NonpositiveDuration: return "NonpositiveDuration";
        case PlanErrc::DuplicateStep: return "DuplicateStep";
        case PlanErrc::UnknownStep: return "UnknownStep";
        case PlanErrc::DuplicateItem: return "DuplicateItem";
    }
    return "Unknown";
}

const Step* AssemblyPlan::find_step(std::string_view id) const {
    auto it = std::find_if(steps.begin(), steps.end(), [&](const auto& s) { return s.id == id; });
    return it == steps.end() ? nullptr : &*it;
}

const Item* AssemblyPlan::find_item(std::string_view id) const {
    auto it = std::find_if(items.begin(), items.end(), [&](const auto& i) { return i.id == id; });
    return it == items.end() ? nullptr : &*it;
}

std::vector<std::string> AssemblyPlan::predecessors(std::string_view step) const {
    std::vector<std::string> out;
    for (const auto& [before, after] : precedence)
        if (after == step) out.push_back(before);
    return out;
}

namespace {

using nlohmann::json;

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    throw Error(Errc::InvalidPlan, std::string{"unknown "} + what + " '" + s + "'");
}

}  // namespace

AssemblyPlan AssemblyPlan::from_json(const json& j) {
    try {
        if (j.value("version", 0) != kPlanVersion)
            throw Error(Errc::InvalidPlan, "plan version must be " + std::to_string(kPlanVersion));
        AssemblyPlan plan;
        plan.id = j.at("id").get<std::string>();
        for (const auto& i : j.value("items", json::array())) {
            Item item;
            item.id = i.at("id").get<std::string>();
            item.kind = parse_enum<ItemKind>(i.at("kind").get<std::string>(),
                                             {{"tool", ItemKind::Tool}, {"component", ItemKind::Component}}, "item kind");
            item.label = i.value("label", item.id);
            item.location = parse_enum<Location>(i.value("location", std::string{"storage"}),
                                                  {{"storage", Location::Storage},
                                                   {"shared-bench", Location::SharedBench},
                                                   {"human-hand", Location::HumanHand},
                                                   {"robot-gripper", Location::RobotGripper}},
                                                  "location");
            plan.items.push_back(std::move(item));
        }
        for (const auto& s : j.at("steps")) {
            Step step;
            step.id = s.at("id").get<std::string>();
            step.actor = parse_enum<Actor>(s.at("actor").get<std::string>(),
                                           {{"human", Actor::Human}, {"robot", Actor::Robot}, {"joint", Actor::Joint}},
                                           "actor");
            step.needs = s.value("needs", std::vector<std::string>{});
            step.nominal_duration = from_seconds(s.at("duration").get<double>());
            step.description = s.value("description", std::string{});
            plan.steps.push_back(std::move(step));
        }
        for (const auto& e : j.value("precedence", json::array())) {
            plan.precedence.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        }
        return plan;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidPlan, std::string{"malformed plan: "} + e.what());
    }
}

AssemblyPlan AssemblyPlan::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open plan " + path.string());
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidPlan, path.string() + " is not valid JSON");
    return from_json(j);
}

json AssemblyPlan::to_json() const {
    json j;
    j["version"] = kPlanVersion;
    j["id"] = id;
    j["items"] = json::array();
    for (const auto& i : items) {
        j["items"].push_back({{"id", i.id},
                              {"kind", std::string{assembly::to_string(i.kind)}},
                              {"label", i.label},
                              {"location", std::string{assembly::to_string(i.location)}}});
    }
    j["steps"] = json::array();
    for (const auto& s : steps) {
        j["steps"].push_back({{"id", s.id},
                              {"actor", std::string{assembly::to_string(s.actor)}},
                              {"needs", s.needs},
                              {"duration", to_seconds(s.nominal_duration)},
                              {"description", s.description}});
    }
    j["precedence"] = json::array();
    for (const auto& [a, b] : precedence) j["precedence"].push_back({a, b});
    return j;
}

std::vector<PlanError> validate_plan(const AssemblyPlan& plan) {
    std::vector<PlanError> errors;
    std::set<std::string> step_ids;
    std::set<std::string> item_ids;
    for (const auto& i : plan.items) {
        if (!item_ids.insert(i.id).second) errors.push_back({PlanErrc::DuplicateItem, "item '" + i.id + "' declared twice"});
    }
    for (const auto& s : plan.steps) {
        if (!step_ids.insert(s.id).second) errors.push_back({PlanErrc::DuplicateStep, "step '" + s.id + "' declared twice"});
        if (s.nominal_duration <= SimTime::zero())
            errors.push_back({PlanErrc::NonpositiveDuration, "step '" + s.id + "' has a non-positive duration"});
        for (const auto& n : s.needs) {
            if (!item_ids.contains(n))
                errors.push_back({PlanErrc::UnknownItem, "step '" + s.id + "' needs undeclared item '" + n + "'"});
        }
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [a, b] : plan.precedence) {
        bool known = true;
        for (const auto* id : {&a, &b}) {
            if (!step_ids.contains(*id)) {
                errors.push_back({PlanErrc::UnknownStep, "precedence references unknown step '" + *id + "'"});
                known = false;
            }
        }
        if (known) edges.emplace_back(a, b);
    }
    {
        // Kahn over edges between known steps: anything left with in-degree
        // > 0 lies on or behind a cycle.
        std::map<std::string, int> indeg;
        for (const auto& id : step_ids) indeg[id] = 0;
        for (const auto& [a, b] : edges) ++indeg[b];
        std::vector<std::string> frontier;
        for (const auto& [id, d] : indeg)
            if (d == 0) frontier.push_back(id);
        std::size_t seen = 0;
        while (!frontier.empty()) {
            auto cur = frontier.back();
            frontier.pop_back();
            ++seen;
            for (const auto& [a, b] : edges)
                if (a == cur && --indeg[b] == 0) frontier.push_back(b);
        }
        if (seen != step_ids.size()) {
            std::string members;
            for (const auto& [id, d] : indeg) {
                if (d > 0) members += (members.empty() ? "" : ", ") + id;
            }
            errors.push_back({PlanErrc::CyclicPrecedence, "precedence cycle through {" + members + "}"});
        }
    }
    return errors;
}

ProgressState ProgressState::initial(const AssemblyPlan& plan) {
    ProgressState p;
    for (const auto& s : plan.steps) p.status[s.id] = StepStatus::Pending;
    for (const auto& i : plan.items) p.item_location[i.id] = i.location;
    return p;
}

bool ProgressState::all_done() const {
    return std::all_of(status.begin(), status.end(), [](const auto& kv) { return kv.second == StepStatus::Done; });
}

std::set<std::string> ready_steps(const AssemblyPlan& plan, const ProgressState& progress) {
    std::set<std::string> out;
    for (const auto& s : plan.steps) {
        auto it = progress.status.find(s.id);
        const auto st = it == progress.status.end() ? StepStatus::Pending : it->second;
        if (st != StepStatus::Pending && st != StepStatus::Ready) continue;
        bool ok = true;
        for (const auto& [a, b] : plan.precedence) {
            if (b != s.id) continue;
            auto p = progress.status.find(a);
            if (p == progress.status.end() || p->second != StepStatus::Done) {
                ok = false;
                break;
            }
        }
        if (ok) out.insert(s.id);
    }
    return out;
}

bool items_available(const AssemblyPlan& plan, const ProgressState& progress, const Step& step) {
    for (const auto& n : step.needs) {
        auto it = progress.item_location.find(n);
        if (it == progress.item_location.end()) return false;
        const auto loc = it->second;
        if (loc == Location::SharedBench) continue;
        if (loc == Location::HumanHand && step.involves_human()) continue;
        if (loc == Location::RobotGripper && step.involves_robot()) continue;
        return false;
    }
    (void)plan;
    return true;
}

std::vector<std::string> topological_order(const AssemblyPlan& plan) {
    std::map<std::string, int> indeg;
    for (const auto& s : plan.steps) indeg[s.id] = 0;
    for (const auto& [a, b] : plan.precedence) ++indeg[b];
    std::vector<std::string> order;
    std::set<std::string> placed;
    while (order.size() < plan.steps.size()) {
        bool progressed = false;
        for (const auto& s : plan.steps) {
            if (placed.contains(s.id) || indeg[s.id] != 0) continue;
            order.push_back(s.id);
            placed.insert(s.id);
            for (const auto& [a, b] : plan.precedence)
                if (a == s.id) --indeg[b];
            progressed = true;
            break;
        }
        if (!progressed) break;  // cyclic; validate_plan reports it
    }
    return order;
}

SimTime critical_path(const AssemblyPlan& plan) {
    std::map<std::string, SimTime> finish;
    SimTime longest{0};
    for (const auto& id : topological_order(plan)) {
        SimTime start{0};
        for (const auto& p : plan.predecessors(id)) start = std::max(start, finish[p]);
        finish[id] = start + plan.find_step(id)->nominal_duration;
        longest = std::max(longest, finish[id]);
    }
    return longest;
}

}  // namespace coassembly::assembly
