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

#include "doctest.h"

#include <atomic>
#include <condition_variable>
#include <future>
#include <mutex>
#include <thread>

#include "coassembly/backend.hpp"
#include "coassembly/error.hpp"
#include "kit/testkit.hpp"

using namespace coassembly;
using namespace coassembly::backend;
using nlohmann::json;

namespace {

// Answers every dispatch the way the robot skill would for tool requests.
struct StubSkill : Fulfillment {
    std::atomic<int> calls{0};
    ResponseEnvelope fulfill(const RequestEnvelope& req) override {
        ++calls;
        ResponseEnvelope r;
        r.session = req.session;
        const auto it = req.slots.find("tool");
        r.speech = it != req.slots.end() ? "Bringing the " + it->second + " now." : "OK: " + req.text;
        r.end = it != req.slots.end();
        r.state_digest = digest(std::to_string(calls.load()));
        return r;
    }
    std::string state_digest() const override { return digest(std::to_string(calls.load())); }
};

RequestEnvelope utterance(std::string session, std::string text) {
    RequestEnvelope env;
    env.session = std::move(session);
    env.text = std::move(text);
    return env;
}

RequestEnvelope control(std::string session, std::string text) {
    auto env = utterance(std::move(session), std::move(text));
    env.kind = RequestKind::Control;
    return env;
}

Errc error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::Io;
}

std::shared_ptr<const dialogue::ConversationScript> two_rule_script() {
    return std::make_shared<const dialogue::ConversationScript>(dialogue::ConversationScript::from_json(json::parse(R"({
      "version": 1,
      "intents": [{"id": "ack", "utterances": ["ok"]}],
      "dialogues": [
        {"id": "ack", "trigger": {"intent": "ack"}, "dispatch": true},
        {"id": "warn", "trigger": {"api": "warn"}, "reply": "Careful with the {item}.", "expects_reply": false},
        {"id": "ask_help", "trigger": {"api": "ask_help"}, "reply": "Can you pick up the {item}?"}
      ],
      "event_rules": [
        {"event": "action_failed", "dialogue": "warn", "payload": {"item": "$item"}},
        {"event": "action_failed", "where": {"reason": "drop"}, "dialogue": "ask_help", "payload": {"item": "$item"}}
      ]
    })")));
}

// Records transcripts; optionally parks the delivering thread inside the
// session lock until released.
struct BlockingSink : TranscriptSink {
    std::mutex m;
    std::condition_variable cv;
    bool block = false, parked = false, released = false;
    std::vector<std::string> lines;

    void user_said(const std::string&, const std::string& text, SimTime) override {
        std::lock_guard lock(m);
        lines.push_back("U:" + text);
    }
    void outcomes(const std::string&, const dialogue::Outcomes& outs, SimTime) override {
        std::unique_lock lock(m);
        for (const auto& o : outs)
            if (const auto* say = std::get_if<dialogue::RobotSay>(&o)) lines.push_back("R:" + say->text);
        if (block) {
            parked = true;
            cv.notify_all();
            cv.wait(lock, [&] { return released; });
        }
    }
};

}  // namespace

TEST_CASE("handle_request composes a complete tool request") {
    StubSkill skill;
    Backend be(testkit::reference_script(), skill);
    const auto r = be.handle_request(utterance("s1", "give me the screwdriver"));
    CHECK(r.session == "s1");
    CHECK(r.speech == "Bringing the screwdriver now.");
    CHECK(r.end);
    CHECK_FALSE(r.follow_up);
    CHECK(r.state_digest == skill.state_digest());
    CHECK(skill.calls == 1);

    // A terminal session accepts the next utterance as a fresh conversation.
    CHECK(be.handle_request(utterance("s1", "hand me the wrench")).speech == "Bringing the torque wrench now.");
}

TEST_CASE("handle_request prompts for a missing slot across two requests") {
    StubSkill skill;
    Backend be(testkit::reference_script(), skill);
    auto r = be.handle_request(utterance("s1", "give me the banana"));
    CHECK(r.speech == "Which tool do you need?");
    CHECK_FALSE(r.end);
    CHECK(skill.calls == 0);
    auto answer = utterance("s1", "the grease gun");
    answer.kind = RequestKind::SlotAnswer;
    r = be.handle_request(answer);
    CHECK(r.speech == "Bringing the grease applicator now.");
    CHECK(r.end);
}

TEST_CASE("handle_request rejects bad envelopes") {
    StubSkill skill;
    Backend be(testkit::reference_script(), skill);
    auto v2 = utterance("s1", "status");
    v2.version = 2;
    CHECK(error_of([&] { be.handle_request(v2); }) == Errc::BadEnvelope);
    CHECK(error_of([&] { be.handle_request(utterance("", "status")); }) == Errc::BadEnvelope);
    CHECK(error_of([&] { be.handle_request(control("s1", "reboot")); }) == Errc::BadEnvelope);
    auto other_mode = utterance("s1", "status");
    other_mode.context.mode = Mode::Baseline;
    CHECK(error_of([&] { be.handle_request(other_mode); }) == Errc::UnknownMode);
    CHECK(be.session_ids() == std::vector<std::string>{});
}

TEST_CASE("first contact") {
    StubSkill skill;
    Backend be(testkit::reference_script(), skill);
    SUBCASE("control open creates the session and greets") {
        const auto r = be.handle_request(control("new", "open"));
        CHECK(r.speech == "Hi, I'm ready to work on the gearbox with you.");
        CHECK_FALSE(r.end);
        CHECK(be.session_ids() == std::vector<std::string>{"new"});
        // Greets once per session.
        CHECK(be.handle_request(control("new", "open")).speech == "...");
    }
    SUBCASE("a first-contact utterance is processed normally") {
        CHECK(be.handle_request(utterance("new", "get the driver")).speech == "Bringing the screwdriver now.");
        REQUIRE(be.session_snapshot("new"));
        CHECK(be.session_snapshot("new")->turn_log.size() == 2);
    }
    SUBCASE("control close ends the conversation") {
        be.handle_request(utterance("new", "give me the banana"));
        const auto r = be.handle_request(control("new", "close"));
        CHECK(r.end);
        CHECK(be.session_snapshot("new")->status == dialogue::SessionStatus::Terminal);
    }
}

TEST_CASE("publish_event") {
    StubSkill skill;
    SUBCASE("failure event opens the recovery dialogue") {
        Backend be(testkit::reference_script(), skill);
        BlockingSink sink;
        be.set_sink(&sink);
        const auto inv = be.publish_event({"action_failed", {{"reason", "drop"}, {"item", "planet carrier"}}});
        CHECK(inv == std::vector<Invocation>{{"assist_recovery_drop", {{"item", "planet carrier"}}}});
        CHECK(sink.lines == std::vector<std::string>{"R:I dropped the planet carrier. Could you place it on the fixture?"});
        const auto s = be.session_snapshot("operator");
        REQUIRE(s);
        CHECK(s->active_dialogue == "assist_recovery_drop");
        CHECK(be.dropped_events() == 0);
    }
    SUBCASE("an event with no rule is dropped and counted") {
        Backend be(testkit::reference_script(), skill);
        CHECK(be.publish_event({"battery_low", {}}).empty());
        CHECK(be.publish_event({"action_failed", {{"reason", "overheated"}}}).empty());
        CHECK(be.dropped_events() == 2);
    }
    SUBCASE("two matching rules fire in declaration order") {
        Backend be(two_rule_script(), skill);
        BlockingSink sink;
        be.set_sink(&sink);
        const auto inv = be.publish_event({"action_failed", {{"reason", "drop"}, {"item", "sun gear"}}});
        CHECK(inv == std::vector<Invocation>{{"warn", {{"item", "sun gear"}}}, {"ask_help", {{"item", "sun gear"}}}});
        CHECK(sink.lines ==
              std::vector<std::string>{"R:Careful with the sun gear.", "R:Can you pick up the sun gear?"});
    }
    SUBCASE("identical event streams give identical invocations") {
        Backend a(testkit::reference_script(), skill), b(testkit::reference_script(), skill);
        const std::vector<Event> events{{"step_ready", {{"actor", "robot"}, {"step", "s3"}, {"description", "press"}}},
                                        {"action_done", {{"requested", "yes"}, {"item", "housing"}}},
                                        {"action_failed", {{"reason", "unreachable"}, {"item", "cover"}}},
                                        {"noise", {}}};
        for (const auto& e : events) CHECK(a.publish_event(e) == b.publish_event(e));
    }
}

TEST_CASE("route_event copies payload fields and literals") {
    const std::vector<EventRule> rules{{"e", {{"k", "v"}}, "d1", {{"item", "$item"}, {"mood", "calm"}}},
                                       {"e", {}, "d2", {{"missing", "$nope"}}}};
    CHECK(route_event(rules, {"e", {{"k", "v"}, {"item", "gear"}}}) ==
          std::vector<Invocation>{{"d1", {{"item", "gear"}, {"mood", "calm"}}}, {"d2", {{"missing", ""}}}});
    CHECK(route_event(rules, {"e", {{"k", "w"}}}).size() == 1);
    CHECK(route_event(rules, {"f", {}}).empty());
}

TEST_CASE("SessionBusy while a robot-initiated turn is being delivered") {
    StubSkill skill;
    Backend be(testkit::reference_script(), skill);
    BlockingSink sink;
    sink.block = true;
    be.set_sink(&sink);

    auto delivery = std::async(std::launch::async, [&] {
        return be.publish_event({"action_failed", {{"reason", "drop"}, {"item", "sun gear"}}});
    });
    {
        std::unique_lock lock(sink.m);
        sink.cv.wait(lock, [&] { return sink.parked; });
    }
    CHECK(error_of([&] { be.handle_request(utterance("operator", "done")); }) == Errc::SessionBusy);
    {
        std::lock_guard lock(sink.m);
        sink.block = false;
    }
    // Other sessions are not blocked by the delivery.
    CHECK(be.handle_request(utterance("bystander", "status")).speech == "OK: status");
    {
        std::lock_guard lock(sink.m);
        sink.released = true;
    }
    sink.cv.notify_all();
    CHECK(delivery.get().size() == 1);
    CHECK(be.handle_request(utterance("operator", "done")).speech == "OK: done");
}

TEST_CASE("requests for one session are serialized under concurrent load") {
    StubSkill skill;
    Backend be(testkit::reference_script(), skill);
    constexpr int kThreads = 8, kEach = 50;
    std::vector<std::thread> threads;
    std::atomic<int> errors{0};
    for (int t = 0; t < kThreads; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < kEach; ++i) {
                try {
                    const auto session = i % 2 ? std::string{"shared"} : "own" + std::to_string(t);
                    const auto r = be.handle_request(utterance(session, "status"));
                    if (r.speech != "OK: status" || r.session != session) ++errors;
                } catch (...) {
                    ++errors;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(errors == 0);
    const auto shared = be.session_snapshot("shared");
    REQUIRE(shared);
    const auto& log = shared->turn_log;
    REQUIRE(log.size() == 2 * kThreads * kEach / 2);
    for (std::size_t i = 0; i < log.size(); ++i) {
        CAPTURE(i);
        CHECK(log[i].speaker == (i % 2 == 0 ? dialogue::Speaker::User : dialogue::Speaker::Robot));
        CHECK(log[i].text == (i % 2 == 0 ? "status" : "OK: status"));
    }
    CHECK(be.session_ids().size() == kThreads + 1);
}

TEST_CASE("StreamHub delivers to every subscriber until unsubscribed") {
    StreamHub hub;
    std::vector<json> a, b;
    const auto ia = hub.subscribe([&](const json& j) { a.push_back(j); });
    hub.subscribe([&](const json& j) { b.push_back(j); });
    CHECK(hub.subscriber_count() == 2);
    hub.publish({{"seq", 0}});
    hub.unsubscribe(ia);
    hub.publish({{"seq", 1}});
    CHECK(a.size() == 1);
    CHECK(b.size() == 2);
    CHECK(b[1].at("seq") == 1);
    CHECK(hub.subscriber_count() == 1);
}
