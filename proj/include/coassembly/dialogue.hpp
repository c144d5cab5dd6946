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

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coassembly/mode.hpp"
#include "coassembly/protocol.hpp"
#include "coassembly/script.hpp"
#include "coassembly/time.hpp"

namespace coassembly::dialogue {

enum class Speaker { User, Robot };
enum class SessionStatus { Idle, AwaitingUser, AwaitingBackend, Terminal };

std::string_view to_string(Speaker s);
std::string_view to_string(SessionStatus s);

struct Turn {
    Speaker speaker;
    std::string text;
    SimTime at;
};

struct PendingSlot {
    std::string slot;
    int prompts_issued = 0;
};

struct Initiation {
    std::string dialogue;
    SlotMap payload;
};

/// Live state of one conversation channel. Owned by a single caller at a
/// time; the engine never keeps references to it.
struct SessionState {
    std::string id;
    Mode mode = Mode::Conversational;
    SessionStatus status = SessionStatus::Idle;
    std::optional<std::string> active_dialogue;
    std::optional<PendingSlot> pending_slot;
    std::deque<Initiation> queued_initiations;
    std::vector<Turn> turn_log;

    // Per-conversation scratch.
    SlotMap filled;
    std::string last_user_text;
    int consecutive_no_match = 0;
    std::optional<backend::RequestEnvelope> in_flight;
};

struct RobotSay {
    std::string text;
    /// Set when this line opens a robot-initiated dialogue.
    std::string opens;
    bool operator==(const RobotSay&) const = default;
};
struct PromptSlot {
    std::string slot;
    std::string text;
    bool operator==(const PromptSlot&) const = default;
};
struct Dispatch {
    backend::RequestEnvelope request;
    bool operator==(const Dispatch&) const = default;
};
struct ConversationEnded {
    bool operator==(const ConversationEnded&) const = default;
};
using TurnOutcome = std::variant<RobotSay, PromptSlot, Dispatch, ConversationEnded>;
using Outcomes = std::vector<TurnOutcome>;

/// Turn-taking conversation executor over an immutable script. Stateless:
/// every call mutates only the SessionState it is handed.
class Engine {
public:
    explicit Engine(std::shared_ptr<const ConversationScript> script);

    const ConversationScript& script() const noexcept { return *script_; }
    std::shared_ptr<const ConversationScript> script_ptr() const noexcept { return script_; }

    SessionState open_session(std::string id, Mode mode = Mode::Conversational) const;

    /// Throws Error(OutOfTurn) when the session awaits the back-end or is
    /// terminal. Unrecognised input yields a clarification line, not an error.
    Outcomes user_turn(SessionState& s, std::string_view text, SimTime now) const;

    /// Throws Error(ProtocolViolation) on schema problems, a session
    /// mismatch, an unknown follow-up, or when no request is in flight.
    Outcomes backend_result(SessionState& s, const backend::ResponseEnvelope& response, SimTime now) const;

    /// Opens a robot-initiated dialogue now when the session is Idle or
    /// Terminal, otherwise queues it. Throws Error(UnknownDialogue).
    Outcomes initiate_dialogue(SessionState& s, std::string_view dialogue_id, const SlotMap& payload, SimTime now) const;

    /// Ends a conversation left waiting on the operator (an ignored prompt).
    Outcomes abandon(SessionState& s, SimTime now) const;

    /// Starts a fresh conversation on a terminal session.
    void reopen(SessionState& s) const;

private:
    void say(SessionState& s, Outcomes& out, std::string text, SimTime now, std::string opens = {}) const;
    void prompt(SessionState& s, Outcomes& out, const DialogueDef& d, const std::string& slot, SimTime now) const;
    void advance(SessionState& s, Outcomes& out, const DialogueDef& d, SimTime now, bool via_answer) const;
    void open_now(SessionState& s, Outcomes& out, const DialogueDef& d, const SlotMap& payload, SimTime now) const;
    void finish(SessionState& s, Outcomes& out, bool ended, SimTime now) const;
    void drain_queue(SessionState& s, Outcomes& out, SimTime now) const;
    const intent::IntentDef* active_intent(const SessionState& s) const;

    std::shared_ptr<const ConversationScript> script_;
};

inline constexpr int kMaxConsecutiveNoMatch = 3;

}  // namespace coassembly::dialogue
