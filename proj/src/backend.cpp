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

#include "coassembly/backend.hpp"

#include "coassembly/error.hpp"

namespace coassembly::backend {

std::uint64_t StreamHub::subscribe(Subscriber fn) {
    std::lock_guard lock(mutex_);
    const auto id = next_id_++;
    subscribers_.emplace(id, std::move(fn));
    return id;
}

void StreamHub::unsubscribe(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    subscribers_.erase(id);
}

void StreamHub::publish(const nlohmann::json& record) {
    std::vector<Subscriber> targets;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, fn] : subscribers_) targets.push_back(fn);
    }
    for (const auto& fn : targets) fn(record);
}

std::size_t StreamHub::subscriber_count() const {
    std::lock_guard lock(mutex_);
    return subscribers_.size();
}

Backend::Backend(std::shared_ptr<const dialogue::ConversationScript> script, Fulfillment& fulfillment, BackendOptions options)
    : engine_(std::move(script)), fulfillment_(fulfillment), options_(std::move(options)) {}

SimTime Backend::now_or(std::optional<SimTime> t) const {
    if (t) return *t;
    return options_.clock ? options_.clock() : SimTime::zero();
}

std::shared_ptr<Backend::Slot> Backend::slot_for(const std::string& id, bool& created) {
    std::lock_guard lock(registry_mutex_);
    auto& slot = sessions_[id];
    created = slot == nullptr;
    if (created) {
        slot = std::make_shared<Slot>();
        slot->state = engine_.open_session(id, options_.mode);
    }
    return slot;
}

dialogue::Outcomes Backend::run_dispatches(Slot& slot, dialogue::Outcomes outcomes, SimTime now) {
    dialogue::Outcomes all;
    while (true) {
        const dialogue::Dispatch* dispatch = nullptr;
        for (const auto& o : outcomes) {
            all.push_back(o);
            if (const auto* d = std::get_if<dialogue::Dispatch>(&o)) dispatch = d;
        }
        if (sink_ != nullptr) sink_->outcomes(slot.state.id, outcomes, now);
        if (dispatch == nullptr) break;
        const auto response = fulfillment_.fulfill(dispatch->request);
        outcomes = engine_.backend_result(slot.state, response, now);
    }
    return all;
}

ResponseEnvelope Backend::handle_request(const RequestEnvelope& env) {
    if (env.version != kProtocolVersion) throw Error(Errc::BadEnvelope, "unsupported version " + std::to_string(env.version));
    if (env.session.empty()) throw Error(Errc::BadEnvelope, "empty session id");
    if (env.context.mode && *env.context.mode != options_.mode)
        throw Error(Errc::UnknownMode, "this back-end runs in " + std::string{to_string(options_.mode)} + " mode");
    if (env.kind == RequestKind::Control && env.text != "open" && env.text != "close")
        throw Error(Errc::BadEnvelope, "unknown control '" + env.text + "'");

    bool created = false;
    auto slot = slot_for(env.session, created);
    std::unique_lock lock(slot->mutex, std::try_to_lock);
    if (!lock.owns_lock()) {
        if (slot->delivering.load()) throw Error(Errc::SessionBusy, "a robot-initiated turn is being delivered");
        lock.lock();
    }

    const SimTime now = now_or(env.context.time);
    auto& state = slot->state;
    dialogue::Outcomes outcomes;

    if (env.kind == RequestKind::Control) {
        if (env.text == "open") {
            engine_.reopen(state);
            if (created || state.turn_log.empty()) {
                dialogue::Outcomes greet{dialogue::RobotSay{engine_.script().phrases().greeting, {}}};
                state.turn_log.push_back({dialogue::Speaker::Robot, engine_.script().phrases().greeting, now});
                if (sink_ != nullptr) sink_->outcomes(state.id, greet, now);
                outcomes = greet;
            }
        } else {
            auto ended = engine_.abandon(state, now);
            if (sink_ != nullptr) sink_->outcomes(state.id, ended, now);
            outcomes = ended;
            state.status = dialogue::SessionStatus::Terminal;
            if (outcomes.empty()) outcomes.emplace_back(dialogue::ConversationEnded{});
        }
    } else {
        engine_.reopen(state);
        if (sink_ != nullptr) sink_->user_said(state.id, env.text, now);
        outcomes = run_dispatches(*slot, engine_.user_turn(state, env.text, now), now);
    }

    ResponseEnvelope resp;
    resp.session = env.session;
    std::string speech;
    bool ended = false;
    for (const auto& o : outcomes) {
        if (ended) break;  // later lines are queued initiations, pushed via the stream
        if (const auto* say = std::get_if<dialogue::RobotSay>(&o)) {
            if (!speech.empty()) speech += ' ';
            speech += say->text;
            if (!say->opens.empty()) resp.follow_up = say->opens;
        } else if (const auto* p = std::get_if<dialogue::PromptSlot>(&o)) {
            if (!speech.empty()) speech += ' ';
            speech += p->text;
        } else if (std::holds_alternative<dialogue::ConversationEnded>(o)) {
            ended = true;
        }
    }
    resp.speech = speech.empty() ? std::string{"..."} : speech;
    resp.end = ended;
    resp.state_digest = fulfillment_.state_digest();
    return resp;
}

std::vector<Invocation> Backend::publish_event(const Event& event, std::optional<SimTime> at) {
    auto invocations = route_event(engine_.script().event_rules(), event);
    if (invocations.empty()) {
        ++dropped_;
        return invocations;
    }
    const auto target_it = event.fields.find("session");
    const std::string target = target_it == event.fields.end() ? options_.default_session : target_it->second;
    bool created = false;
    auto slot = slot_for(target, created);
    std::lock_guard lock(slot->mutex);
    slot->delivering = true;
    const SimTime now = now_or(at);
    for (const auto& inv : invocations) {
        auto outcomes = engine_.initiate_dialogue(slot->state, inv.dialogue, inv.payload, now);
        if (sink_ != nullptr && !outcomes.empty()) sink_->outcomes(slot->state.id, outcomes, now);
    }
    slot->delivering = false;
    return invocations;
}

std::optional<dialogue::SessionState> Backend::session_snapshot(const std::string& id) const {
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(registry_mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return std::nullopt;
        slot = it->second;
    }
    std::lock_guard lock(slot->mutex);
    return slot->state;
}

std::vector<std::string> Backend::session_ids() const {
    std::lock_guard lock(registry_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return ids;
}

}  // namespace coassembly::backend
