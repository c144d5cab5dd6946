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

#include "coassembly/robot.hpp"

#include <stdexcept>

#include "coassembly/rng.hpp"

namespace coassembly::robot {

std::string_view to_string(ActionKind k) {
    switch (k) {
        case ActionKind::FetchTool: return "fetch_tool";
        case ActionKind::DeliverComponent: return "deliver_component";
        case ActionKind::Hold: return "hold";
        case ActionKind::AssistStep: return "assist_step";
        case ActionKind::Reset: return "reset";
    }
    return "reset";
}

std::string_view to_string(RobotMode m) {
    switch (m) {
        case RobotMode::Idle: return "idle";
        case RobotMode::Executing: return "executing";
        case RobotMode::Blocked: return "blocked";
        case RobotMode::Faulted: return "faulted";
    }
    return "idle";
}

std::string_view to_string(FailureReason r) {
    switch (r) {
        case FailureReason::Drop: return "drop";
        case FailureReason::GraspMiss: return "grasp_miss";
        case FailureReason::Unreachable: return "unreachable";
    }
    return "drop";
}

std::optional<ActionKind> parse_action_kind(std::string_view s) {
    for (auto k : {ActionKind::FetchTool, ActionKind::DeliverComponent, ActionKind::Hold, ActionKind::AssistStep,
                   ActionKind::Reset})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<FailureReason> parse_failure_reason(std::string_view s) {
    for (auto r : {FailureReason::Drop, FailureReason::GraspMiss, FailureReason::Unreachable})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

std::string Failure::problem() const {
    switch (reason) {
        case FailureReason::Drop: return "I dropped the " + action.object + ".";
        case FailureReason::GraspMiss: return "I missed my grasp on the " + action.object + ".";
        case FailureReason::Unreachable: return "I cannot reach the " + action.object + ".";
    }
    return {};
}

std::vector<std::string> FailureModel::check() const {
    std::vector<std::string> problems;
    for (const auto& [kind, p] : probability) {
        if (!(p >= 0.0 && p <= 1.0))
            problems.push_back("failure probability for " + std::string{to_string(kind)} + " must lie in [0, 1]");
    }
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (schedule[i].at <= schedule[i - 1].at) problems.push_back("failure schedule times must be strictly increasing");
    }
    return problems;
}

namespace {

FailureReason default_reason(ActionKind k) {
    switch (k) {
        case ActionKind::Hold: return FailureReason::GraspMiss;
        case ActionKind::AssistStep: return FailureReason::Unreachable;
        default: return FailureReason::Drop;
    }
}

}  // namespace

Robot::Robot(FailureModel model, SimTime start) : model_(std::move(model)), now_(start) {}

EnqueueResult Robot::enqueue(RobotAction action) {
    const auto mode = state_.mode;
    const bool can_start = mode == RobotMode::Idle || mode == RobotMode::Blocked ||
                           (mode == RobotMode::Faulted && action.kind == ActionKind::Reset);
    if (!can_start || action.duration <= SimTime::zero()) return EnqueueResult::Busy;

    ++ordinal_;
    started_at_ = now_;
    fail_at_.reset();
    if (action.kind != ActionKind::Reset) {
        const SimTime end = now_ + action.duration;
        const SimTime midpoint = now_ + action.duration / 2;
        std::optional<SimTime> hit;
        FailureReason reason = default_reason(action.kind);
        if (next_scheduled_ < model_.schedule.size()) {
            const auto& entry = model_.schedule[next_scheduled_];
            if (entry.at <= now_ || entry.at < end) {
                hit = entry.at <= now_ ? midpoint : entry.at;
                reason = entry.reason.value_or(default_reason(action.kind));
                ++next_scheduled_;
            }
        }
        RandomStream draw(model_.seed, "robot.failure", ordinal_);
        const double u = draw.uniform01();
        if (auto it = model_.probability.find(action.kind); it != model_.probability.end() && u < it->second) {
            if (!hit || midpoint < *hit) {
                hit = midpoint;
                reason = default_reason(action.kind);
            }
        }
        if (hit && *hit > now_ && *hit < end) {
            fail_at_ = *hit;
            fail_reason_ = reason;
        }
    }

    state_.mode = RobotMode::Executing;
    state_.remaining = action.duration;
    state_.blocked_reason.clear();
    state_.failure.reset();
    if (action.kind != ActionKind::Reset && action.kind != ActionKind::AssistStep) state_.gripper = action.object;
    state_.action = std::move(action);
    return EnqueueResult::Accepted;
}

std::vector<RobotEvent> Robot::tick(SimTime dt) {
    if (dt <= SimTime::zero()) throw std::invalid_argument("tick requires dt > 0");
    std::vector<RobotEvent> events;
    const SimTime window_end = now_ + dt;
    if (state_.mode == RobotMode::Executing) {
        const SimTime done_at = now_ + state_.remaining;
        if (fail_at_ && *fail_at_ <= window_end && *fail_at_ < done_at) {
            Failure f{fail_reason_, *state_.action, *fail_at_};
            state_.remaining -= *fail_at_ - now_;
            state_.mode = RobotMode::Faulted;
            if (f.reason == FailureReason::Drop) state_.gripper.reset();
            state_.failure = f;
            fail_at_.reset();
            events.push_back({RobotEvent::Kind::ActionFailed, f.at, f.action, f});
        } else if (done_at <= window_end) {
            state_.remaining = SimTime::zero();
            state_.mode = RobotMode::Idle;
            state_.gripper.reset();
            events.push_back({RobotEvent::Kind::ActionDone, done_at, *state_.action, std::nullopt});
            state_.action.reset();
        } else {
            state_.remaining -= dt;
        }
    }
    now_ = window_end;
    return events;
}

void Robot::block(std::string reason) {
    if (state_.mode == RobotMode::Idle || state_.mode == RobotMode::Blocked) {
        state_.mode = RobotMode::Blocked;
        state_.blocked_reason = std::move(reason);
    }
}

void Robot::unblock() {
    if (state_.mode == RobotMode::Blocked) {
        state_.mode = RobotMode::Idle;
        state_.blocked_reason.clear();
    }
}

std::optional<SimTime> Robot::next_event_time() const {
    if (state_.mode != RobotMode::Executing) return std::nullopt;
    const SimTime done_at = now_ + state_.remaining;
    if (fail_at_ && *fail_at_ < done_at) return *fail_at_;
    return done_at;
}

std::string status_text(const RobotState& s) {
    switch (s.mode) {
        case RobotMode::Idle:
            if (s.gripper) return "I am idle and holding the " + *s.gripper + ".";
            return "I am idle and ready to help.";
        case RobotMode::Blocked:
            return "I am waiting: " + s.blocked_reason + ".";
        case RobotMode::Faulted:
            return "I had a problem: " + (s.failure ? s.failure->problem() : std::string{"unknown failure."});
        case RobotMode::Executing:
            break;
    }
    const auto& a = *s.action;
    switch (a.kind) {
        case ActionKind::FetchTool: return "I am fetching the " + a.object + ".";
        case ActionKind::DeliverComponent: return "I am bringing the " + a.object + ".";
        case ActionKind::Hold: return "I am holding the " + a.object + ".";
        case ActionKind::AssistStep: return "I am working on the step: " + a.description + ".";
        case ActionKind::Reset: return "I am resetting after a problem.";
    }
    return "I am busy.";
}

}  // namespace coassembly::robot
