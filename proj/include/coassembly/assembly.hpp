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

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "coassembly/time.hpp"

namespace coassembly::assembly {

inline constexpr int kPlanVersion = 1;

enum class Actor { Human, Robot, Joint };
enum class ItemKind { Tool, Component };
enum class Location { Storage, SharedBench, HumanHand, RobotGripper };
enum class StepStatus { Pending, Ready, Active, Done, Failed };

std::string_view to_string(Actor a);
std::string_view to_string(ItemKind k);
std::string_view to_string(Location l);
std::string_view to_string(StepStatus s);

struct Item {
    std::string id;
    ItemKind kind = ItemKind::Component;
    std::string label;  // catalog canonical value used in dialogue
    Location location = Location::Storage;
};

struct Step {
    std::string id;
    Actor actor = Actor::Human;
    std::vector<std::string> needs;
    SimTime nominal_duration{0};
    std::string description;

    /// Robot and joint steps both occupy the robot.
    bool involves_robot() const noexcept { return actor != Actor::Human; }
    bool involves_human() const noexcept { return actor != Actor::Robot; }
};

struct AssemblyPlan {
    std::string id;
    std::vector<Step> steps;
    std::vector<std::pair<std::string, std::string>> precedence;  // (before, after)
    std::vector<Item> items;

    const Step* find_step(std::string_view id) const;
    const Item* find_item(std::string_view id) const;
    std::vector<std::string> predecessors(std::string_view step) const;

    static AssemblyPlan from_json(const nlohmann::json& j);
    static AssemblyPlan load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

enum class PlanErrc { CyclicPrecedence, UnknownItem, NonpositiveDuration, DuplicateStep, UnknownStep, DuplicateItem };

std::string_view to_string(PlanErrc e);

struct PlanError {
    PlanErrc code;
    std::string message;
};

/// Every problem found; an empty list means the plan is valid.
std::vector<PlanError> validate_plan(const AssemblyPlan& plan);

struct ProgressState {
    std::map<std::string, StepStatus> status;
    std::map<std::string, Location> item_location;

    static ProgressState initial(const AssemblyPlan& plan);
    bool all_done() const;
};

/// Not-yet-started steps (pending or ready) whose predecessors are all done.
std::set<std::string> ready_steps(const AssemblyPlan& plan, const ProgressState& progress);

/// Whether every item the step needs is on the shared bench or held by the
/// step's actor.
bool items_available(const AssemblyPlan& plan, const ProgressState& progress, const Step& step);

/// Kahn's algorithm; ties go to plan declaration order. Requires a valid plan.
std::vector<std::string> topological_order(const AssemblyPlan& plan);

/// Longest path through the precedence DAG weighted by nominal durations.
SimTime critical_path(const AssemblyPlan& plan);

}  // namespace coassembly::assembly
