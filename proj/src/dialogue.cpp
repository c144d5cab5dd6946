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

#include "coassembly/dialogue.hpp"

#include "coassembly/error.hpp"

namespace coassembly::dialogue {

std::string_view to_string(Speaker s) { return s == Speaker::User ? "user" : "robot"; }

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::Idle: return "idle";
        case SessionStatus::AwaitingUser: return "awaiting_user";
        case SessionStatus::AwaitingBackend: return "awaiting_backend";
        case SessionStatus::Terminal: return "terminal";
    }
    return "idle";
}

Engine::Engine(std::shared_ptr<const ConversationScript> script) : script_(std::move(script)) {}

SessionState Engine::open_session(std::string id, Mode mode) const {
    SessionState s;
    s.id = std::move(id);
    s.mode = mode;
    return s;
}

const intent::IntentDef* Engine::active_intent(const SessionState& s) const {
    if (!s.active_dialogue) return nullptr;
    const auto* d = script_->find_dialogue(*s.active_dialogue);
    if (d == nullptr) return nullptr;
    const auto* t = std::get_if<UserIntentTrigger>(&d->trigger);
    return t == nullptr ? nullptr : script_->matcher().find_intent(t->intent);
}

void Engine::say(SessionState& s, Outcomes& out, std::string text, SimTime now, std::string opens) const {
    s.turn_log.push_back({Speaker::Robot, text, now});
    out.emplace_back(RobotSay{std::move(text), std::move(opens)});
}

void Engine::prompt(SessionState& s, Outcomes& out, const DialogueDef& d, const std::string& slot, SimTime now) const {
    const auto& text = d.slot_prompts.at(slot);
    if (!s.pending_slot || s.pending_slot->slot != slot) s.pending_slot = PendingSlot{slot, 0};
    ++s.pending_slot->prompts_issued;
    s.status = SessionStatus::AwaitingUser;
    s.turn_log.push_back({Speaker::Robot, text, now});
    out.emplace_back(PromptSlot{slot, text});
}

void Engine::advance(SessionState& s, Outcomes& out, const DialogueDef& d, SimTime now, bool via_answer) const {
    const auto* in = active_intent(s);
    if (in != nullptr) {
        for (const auto& slot : in->slots) {
            if (slot.required && !s.filled.contains(slot.name)) {
                prompt(s, out, d, slot.name, now);
                return;
            }
        }
    }
    s.pending_slot.reset();
    if (d.dispatch) {
        backend::RequestEnvelope env;
        env.session = s.id;
        env.kind = via_answer ? backend::RequestKind::SlotAnswer : backend::RequestKind::Utterance;
        env.text = s.last_user_text;
        env.context.mode = s.mode;
        env.context.time = now;
        if (in != nullptr) env.intent = in->id;
        env.slots = s.filled;
        s.in_flight = env;
        s.status = SessionStatus::AwaitingBackend;
        out.emplace_back(Dispatch{std::move(env)});
        return;
    }
    say(s, out, render_text(d.reply_template, s.filled), now);
    if (d.follow_up) {
        open_now(s, out, *script_->find_dialogue(*d.follow_up), s.filled, now);
        drain_queue(s, out, now);
    } else {
        finish(s, out, true, now);
    }
}

void Engine::open_now(SessionState& s, Outcomes& out, const DialogueDef& d, const SlotMap& payload, SimTime now) const {
    const SlotMap values = payload;
    s.active_dialogue = d.id;
    s.pending_slot.reset();
    s.filled = values;
    s.consecutive_no_match = 0;
    s.in_flight.reset();
    say(s, out, render_text(d.reply_template, values), now, d.id);
    if (d.expects_reply) {
        s.status = SessionStatus::AwaitingUser;
    } else {
        out.emplace_back(ConversationEnded{});
        s.status = SessionStatus::Terminal;
        s.active_dialogue.reset();
        s.filled.clear();
    }
}

void Engine::drain_queue(SessionState& s, Outcomes& out, SimTime now) const {
    while (s.status != SessionStatus::AwaitingUser && s.status != SessionStatus::AwaitingBackend &&
           !s.queued_initiations.empty()) {
        auto next = std::move(s.queued_initiations.front());
        s.queued_initiations.pop_front();
        open_now(s, out, *script_->find_dialogue(next.dialogue), next.payload, now);
    }
}

void Engine::finish(SessionState& s, Outcomes& out, bool ended, SimTime now) const {
    if (ended) out.emplace_back(ConversationEnded{});
    s.status = ended ? SessionStatus::Terminal : SessionStatus::Idle;
    s.active_dialogue.reset();
    s.pending_slot.reset();
    s.filled.clear();
    s.consecutive_no_match = 0;
    s.in_flight.reset();
    drain_queue(s, out, now);
}

Outcomes Engine::user_turn(SessionState& s, std::string_view text, SimTime now) const {
    if (s.status == SessionStatus::AwaitingBackend || s.status == SessionStatus::Terminal)
        throw Error(Errc::OutOfTurn, "session '" + s.id + "' is " + std::string{to_string(s.status)});

    Outcomes out;
    s.turn_log.push_back({Speaker::User, std::string{text}, now});
    s.last_user_text = std::string{text};

    if (s.pending_slot) {
        const auto* d = script_->find_dialogue(*s.active_dialogue);
        const auto* in = active_intent(s);
        const auto* slot = in != nullptr ? in->find_slot(s.pending_slot->slot) : nullptr;
        std::optional<std::string> value;
        if (slot != nullptr) value = script_->matcher().resolve_slot_answer(*slot, text);
        if (value) {
            s.filled[slot->name] = *value;
            advance(s, out, *d, now, true);
        } else if (s.pending_slot->prompts_issued < d->max_slot_retries + 1) {
            prompt(s, out, *d, s.pending_slot->slot, now);
        } else {
            say(s, out, script_->phrases().retry_exhausted, now);
            finish(s, out, true, now);
        }
        return out;
    }

    auto match = script_->matcher().match(text);
    if (!match) {
        if (++s.consecutive_no_match >= kMaxConsecutiveNoMatch) {
            say(s, out, script_->phrases().give_up, now);
            finish(s, out, true, now);
        } else {
            say(s, out, script_->phrases().clarify, now);
            s.status = SessionStatus::AwaitingUser;
        }
        return out;
    }

    const auto* d = script_->dialogue_for_intent(match->intent);
    s.consecutive_no_match = 0;
    s.active_dialogue = d->id;
    s.filled = std::move(match->filled);
    s.pending_slot.reset();
    advance(s, out, *d, now, false);
    return out;
}

Outcomes Engine::backend_result(SessionState& s, const backend::ResponseEnvelope& response, SimTime now) const {
    auto violation = [&](const std::string& why) { return Error(Errc::ProtocolViolation, why); };
    if (s.status != SessionStatus::AwaitingBackend || !s.in_flight)
        throw violation("session '" + s.id + "' has no request in flight");
    if (response.version != backend::kProtocolVersion) throw violation("unsupported response version");
    if (response.session != s.id) throw violation("response for session '" + response.session + "' delivered to '" + s.id + "'");
    if (response.speech.empty()) throw violation("response has no speech");
    const DialogueDef* follow = nullptr;
    if (response.follow_up) {
        follow = script_->find_dialogue(*response.follow_up);
        if (follow == nullptr || !follow->robot_initiated())
            throw violation("follow-up '" + *response.follow_up + "' is not a robot-initiated dialogue of this script");
    }

    Outcomes out;
    s.in_flight.reset();
    say(s, out, response.speech, now);
    if (follow != nullptr) {
        open_now(s, out, *follow, s.filled, now);
        drain_queue(s, out, now);
    } else {
        finish(s, out, response.end, now);
    }
    return out;
}

Outcomes Engine::initiate_dialogue(SessionState& s, std::string_view dialogue_id, const SlotMap& payload,
                                   SimTime now) const {
    const auto* d = script_->find_dialogue(dialogue_id);
    if (d == nullptr || !d->robot_initiated())
        throw Error(Errc::UnknownDialogue, "no robot-initiated dialogue '" + std::string{dialogue_id} + "'");
    Outcomes out;
    if (s.status == SessionStatus::Idle || s.status == SessionStatus::Terminal) {
        open_now(s, out, *d, payload, now);
        drain_queue(s, out, now);
    } else {
        s.queued_initiations.push_back({d->id, payload});
    }
    return out;
}

Outcomes Engine::abandon(SessionState& s, SimTime now) const {
    Outcomes out;
    if (s.status == SessionStatus::AwaitingUser) finish(s, out, true, now);
    return out;
}

void Engine::reopen(SessionState& s) const {
    if (s.status == SessionStatus::Terminal) s.status = SessionStatus::Idle;
}

}  // namespace coassembly::dialogue
