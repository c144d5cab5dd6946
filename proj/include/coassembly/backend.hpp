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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "coassembly/dialogue.hpp"
#include "coassembly/events.hpp"
#include "coassembly/protocol.hpp"

namespace coassembly::backend {

/// Skill logic behind dispatched requests (the robot side of the skill).
class Fulfillment {
public:
    virtual ~Fulfillment() = default;
    virtual ResponseEnvelope fulfill(const RequestEnvelope& dispatched) = 0;
    virtual std::string state_digest() const = 0;
};

/// Receives every turn the back-end produces, in order, while the session
/// lock is held. Must not call back into the Backend.
class TranscriptSink {
public:
    virtual ~TranscriptSink() = default;
    virtual void user_said(const std::string& session, const std::string& text, SimTime at) = 0;
    virtual void outcomes(const std::string& session, const dialogue::Outcomes& outcomes, SimTime at) = 0;
};

/// Multi-subscriber push channel for newline-delimited JSON records.
class StreamHub {
public:
    using Subscriber = std::function<void(const nlohmann::json&)>;

    std::uint64_t subscribe(Subscriber fn);
    void unsubscribe(std::uint64_t id);
    void publish(const nlohmann::json& record);
    std::size_t subscriber_count() const;

private:
    mutable std::mutex mutex_;
    std::map<std::uint64_t, Subscriber> subscribers_;
    std::uint64_t next_id_ = 1;
};

struct BackendOptions {
    Mode mode = Mode::Conversational;
    /// Target of robot-initiated dialogues for events that name no session.
    std::string default_session = "operator";
    std::function<SimTime()> clock;
};

/// Session registry plus request routing. Requests for one session are
/// serialized; different sessions proceed concurrently.
class Backend {
public:
    Backend(std::shared_ptr<const dialogue::ConversationScript> script, Fulfillment& fulfillment, BackendOptions options = {});

    /// Throws Error(BadEnvelope), Error(UnknownMode) or Error(SessionBusy).
    ResponseEnvelope handle_request(const RequestEnvelope& env);

    /// Opens (or queues) every dialogue whose rule matches, in rule order.
    /// Events matching no rule are dropped and counted.
    std::vector<Invocation> publish_event(const Event& event, std::optional<SimTime> at = std::nullopt);

    void set_sink(TranscriptSink* sink) { sink_ = sink; }
    StreamHub& stream() noexcept { return stream_; }

    std::uint64_t dropped_events() const noexcept { return dropped_.load(); }
    std::optional<dialogue::SessionState> session_snapshot(const std::string& id) const;
    std::vector<std::string> session_ids() const;
    const dialogue::Engine& engine() const noexcept { return engine_; }
    Mode mode() const noexcept { return options_.mode; }

private:
    struct Slot {
        std::mutex mutex;
        dialogue::SessionState state;
        std::atomic<bool> delivering{false};
    };

    std::shared_ptr<Slot> slot_for(const std::string& id, bool& created);
    SimTime now_or(std::optional<SimTime> t) const;
    dialogue::Outcomes run_dispatches(Slot& slot, dialogue::Outcomes outcomes, SimTime now);

    dialogue::Engine engine_;
    Fulfillment& fulfillment_;
    BackendOptions options_;
    TranscriptSink* sink_ = nullptr;
    StreamHub stream_;
    std::atomic<std::uint64_t> dropped_{0};

    mutable std::mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace coassembly::backend
