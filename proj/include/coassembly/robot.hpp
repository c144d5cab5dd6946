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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coassembly/time.hpp"

namespace coassembly::robot {

enum class ActionKind { FetchTool, DeliverComponent, Hold, AssistStep, Reset };
enum class RobotMode { Idle, Executing, Blocked, Faulted };
enum class FailureReason { Drop, GraspMiss, Unreachable };

std::string_view to_string(ActionKind k);
std::string_view to_string(RobotMode m);
std::string_view to_string(FailureReason r);
std::optional<ActionKind> parse_action_kind(std::string_view s);
std::optional<FailureReason> parse_failure_reason(std::string_view s);

struct RobotAction {
    ActionKind kind = ActionKind::Reset;
    std::string target;       // item id or step id
    std::string object;       // spoken noun, e.g. "torque wrench"
    std::string description;  // step description for AssistStep
    SimTime duration{0};

    bool operator==(const RobotAction&) const = default;
};

struct Failure {
    FailureReason reason = FailureReason::Drop;
    RobotAction action;
    SimTime at{0};

    /// "I dropped the carrier."
    std::string problem() const;
};

struct ScheduledFailure {
    SimTime at{0};
    std::optional<FailureReason> reason;
};

/// Seeded failure injection. Draws happen once per action, at its start,
/// from a stream keyed by (seed, action ordinal). A scheduled failure strikes
/// the action executing at its time, or the next action started after it.
struct FailureModel {
    std::map<ActionKind, double> probability;
    std::uint64_t seed = 0;
    std::vector<ScheduledFailure> schedule;

    /// Empty when valid.
    std::vector<std::string> check() const;
};

struct RobotState {
    RobotMode mode = RobotMode::Idle;
    std::optional<RobotAction> action;
    SimTime remaining{0};
    std::string blocked_reason;
    std::optional<Failure> failure;
    std::optional<std::string> gripper;
};

struct RobotEvent {
    enum class Kind { ActionDone, ActionFailed };
    Kind kind;
    SimTime at;
    RobotAction action;
    std::optional<Failure> failure;
};

enum class EnqueueResult { Accepted, Busy };

/// Single-armed manipulator: one action at a time.
class Robot {
public:
    explicit Robot(FailureModel model = {}, SimTime start = SimTime::zero());

    /// Idle or Blocked robots start the action. A Faulted robot only accepts
    /// Reset. Anything else is Busy.
    EnqueueResult enqueue(RobotAction action);

    /// Advances the robot clock by dt (> 0). At most one action ends per call.
    std::vector<RobotEvent> tick(SimTime dt);

    /// Marks an idle robot as waiting on a named precondition.
    void block(std::string reason);
    void unblock();

    /// Absolute time of the next completion or failure, if executing.
    std::optional<SimTime> next_event_time() const;

    const RobotState& state() const noexcept { return state_; }
    SimTime now() const noexcept { return now_; }
    std::uint64_t actions_started() const noexcept { return ordinal_; }

private:
    FailureModel model_;
    RobotState state_;
    SimTime now_;
    SimTime started_at_{0};
    std::optional<SimTime> fail_at_;
    FailureReason fail_reason_ = FailureReason::Drop;
    std::size_t next_scheduled_ = 0;
    std::uint64_t ordinal_ = 0;
};

/// Stable one-line description of the robot's mode and gripper contents.
std::string status_text(const RobotState& state);

}  // namespace coassembly::robot
