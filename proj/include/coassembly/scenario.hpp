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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "coassembly/assembly.hpp"
#include "coassembly/mode.hpp"
#include "coassembly/rng.hpp"
#include "coassembly/robot.hpp"
#include "coassembly/script.hpp"
#include "coassembly/time.hpp"

namespace coassembly::sim {

inline constexpr int kScenarioVersion = 1;

struct LatencyDist {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Constant;
    SimTime min{0};
    SimTime max{0};

    SimTime draw(RandomStream& rng) const;

    static LatencyDist constant(SimTime t) { return {Kind::Constant, t, t}; }
    static LatencyDist from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// What the scripted operator does when it observes something: wait a
/// latency drawn from one of the profile's distributions, optionally do the
/// physical recovery work, then say a line. An empty `say` means silence.
struct PolicyEntry {
    std::string latency = "none";  // none | response | observe | fault_notice
    std::string say;
    bool recover = false;
};

/// Policy keys, most specific first when looked up:
///   request:<item id>, request:tool, request:component
///   hold                        joint step ready, ask the robot to hold
///   slot:<slot name>            answer to a slot prompt
///   prompt:<dialogue id>, prompt    answer to a robot-opened dialogue
///   clarify                     answer to a clarification line
///   fault                       a silently faulted robot is noticed
///   next                        a robot waiting for its go signal is noticed
struct OperatorProfile {
    LatencyDist response;
    LatencyDist observe;
    LatencyDist fault_notice;
    SimTime recovery_work{0};
    double speed_factor = 1.0;
    std::map<std::string, PolicyEntry> policy;

    /// First entry found among keys, else the built-in default for the last key.
    PolicyEntry lookup(const std::vector<std::string>& keys) const;
    const LatencyDist* latency(const std::string& name) const;
};

struct RobotProfile {
    SimTime fetch_tool{from_seconds(6)};
    SimTime deliver_component{from_seconds(8)};
    SimTime reset{from_seconds(5)};
    robot::FailureModel failures;
};

struct ScenarioConfig {
    std::string name = "scenario";
    Mode mode = Mode::Conversational;
    std::uint64_t seed = 0;
    SimTime max_time{from_seconds(3600)};
    /// false disables the voice channel in both modes.
    bool communication = true;

    std::filesystem::path plan_path;
    std::filesystem::path script_path;
    std::filesystem::path baseline_script_path;
    std::shared_ptr<const assembly::AssemblyPlan> plan;
    std::shared_ptr<const dialogue::ConversationScript> conversational_script;
    std::shared_ptr<const dialogue::ConversationScript> baseline_script;

    OperatorProfile op;
    RobotProfile robot;

    std::shared_ptr<const dialogue::ConversationScript> active_script() const {
        return mode == Mode::Baseline ? baseline_script : conversational_script;
    }

    /// Every problem found; empty when the scenario can run.
    std::vector<std::string> check() const;

    /// Relative asset paths resolve against base_dir. Throws Error(InvalidScenario),
    /// Error(InvalidPlan) or Error(InvalidScript) with every problem found.
    static ScenarioConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static ScenarioConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Throws Error(InvalidPlan) listing every validation problem.
std::shared_ptr<const assembly::AssemblyPlan> load_valid_plan(const std::filesystem::path& path);

}  // namespace coassembly::sim
