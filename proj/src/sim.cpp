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

#include "coassembly/sim.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <set>

#include <spdlog/spdlog.h>

#include "coassembly/error.hpp"
#include "coassembly/protocol.hpp"

namespace coassembly::sim {

using nlohmann::json;
using assembly::Actor;
using assembly::ItemKind;
using assembly::Location;
using assembly::StepStatus;
using robot::ActionKind;
using robot::RobotAction;
using robot::RobotMode;

namespace {

constexpr int kKernelClass = 2;
constexpr int kOperatorClass = 3;

struct Scheduled {
    SimTime at;
    int cls;
    std::uint64_t seq;
    std::function<void()> fn;
};

struct Later {
    bool operator()(const Scheduled& a, const Scheduled& b) const {
        return std::tie(a.at, a.cls, a.seq) > std::tie(b.at, b.cls, b.seq);
    }
};

bool is_delivery(ActionKind k) { return k == ActionKind::FetchTool || k == ActionKind::DeliverComponent; }

}  // namespace

struct Simulation::Impl : backend::Fulfillment, backend::TranscriptSink {
    enum class Activity { None, Working, Joint, Recovering };

    struct Speech {
        PolicyEntry entry;
        std::string label;
    };

    struct Operator {
        std::vector<std::string> chain;  // steps involving the human, in topological order
        Activity activity = Activity::None;
        std::string step;
        SimTime work_end{0};
        SimTime work_left{0};
        bool paused = false;
        std::uint64_t work_token = 0;
        std::optional<std::string> waiting_joint;
        std::set<std::string> requested_labels;
        std::size_t prompt_handled = 0;
        bool answer_scheduled = false;
        bool next_scheduled = false;
        bool speak_scheduled = false;
        std::deque<Speech> speech_queue;
        std::string last_said;
        std::string slot_label;
        std::uint64_t latency_ordinal = 0;
    };

    ScenarioConfig cfg;
    SimOptions opt;
    const assembly::AssemblyPlan& plan;
    std::vector<std::string> topo;

    Trace trace;
    SimTime now{0};
    bool started = false;
    bool ended = false;
    std::string end_reason;
    std::optional<std::string> cue;

    robot::Robot robot;
    assembly::ProgressState progress;
    std::unique_ptr<backend::Backend> backend_;

    std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue;
    std::uint64_t seq = 0;

    // robot side
    std::string last_robot_sig;
    std::deque<std::string> requests;
    std::set<std::string> in_transit, dropped, requested_items;
    std::set<std::string> proposed, approved, hold_requested;
    bool pending_reset = false;
    bool stopped = false;
    std::optional<RobotAction> retry;
    std::vector<RobotAction> sequence;
    std::size_t head = 0;
    bool token = false;
    std::vector<backend::Event> outbox;

    Operator op;

    Impl(ScenarioConfig config, SimOptions options)
        : cfg(std::move(config)),
          opt(std::move(options)),
          plan(*cfg.plan),
          topo(assembly::topological_order(plan)),
          robot(cfg.robot.failures),
          progress(assembly::ProgressState::initial(plan)) {
        backend::BackendOptions bo;
        bo.mode = cfg.mode;
        bo.default_session = kOperatorSession;
        bo.clock = [this] { return now; };
        backend_ = std::make_unique<backend::Backend>(cfg.active_script(), *this, bo);
        backend_->set_sink(this);
        for (const auto& id : topo) {
            if (plan.find_step(id)->involves_human()) op.chain.push_back(id);
        }
        build_sequence();
    }

    bool gated() const { return cfg.communication && cfg.mode == Mode::Baseline; }
    bool conversational() const { return cfg.communication && cfg.mode == Mode::Conversational; }

    // ---- trace ----------------------------------------------------------

    void record(RecordKind kind, json data) {
        const auto& r = trace.append(now, kind, std::move(data));
        if (opt.on_record) opt.on_record(r);
    }

    void user_said(const std::string& session, const std::string& text, SimTime) override {
        record(RecordKind::Utterance, {{"speaker", "user"}, {"text", text}, {"session", session}});
    }

    void outcomes(const std::string& session, const dialogue::Outcomes& outs, SimTime) override {
        for (const auto& o : outs) {
            if (const auto* say = std::get_if<dialogue::RobotSay>(&o)) {
                json d{{"speaker", "robot"}, {"text", say->text}, {"session", session}};
                if (!say->opens.empty()) d["opens"] = say->opens;
                record(RecordKind::Utterance, d);
            } else if (const auto* p = std::get_if<dialogue::PromptSlot>(&o)) {
                record(RecordKind::Utterance, {{"speaker", "robot"}, {"text", p->text}, {"session", session}});
                record(RecordKind::Dialogue, {{"outcome", "prompt_slot"}, {"slot", p->slot}, {"session", session}});
            } else if (const auto* d = std::get_if<dialogue::Dispatch>(&o)) {
                record(RecordKind::Dialogue, {{"outcome", "dispatch"},
                                              {"intent", d->request.intent.value_or("")},
                                              {"slots", d->request.slots},
                                              {"session", session}});
            } else {
                record(RecordKind::Dialogue, {{"outcome", "ended"}, {"session", session}});
            }
        }
    }

    void sync_robot_record() {
        const auto& s = robot.state();
        json d{{"event", "mode"}, {"mode", robot::to_string(s.mode)}};
        if (s.action && (s.mode == RobotMode::Executing || s.mode == RobotMode::Faulted)) {
            d["action"] = robot::to_string(s.action->kind);
            d["target"] = s.action->target;
        }
        if (s.mode == RobotMode::Blocked) d["reason"] = s.blocked_reason;
        if (s.mode == RobotMode::Faulted && s.failure) d["reason"] = robot::to_string(s.failure->reason);
        auto sig = d.dump();
        if (sig != last_robot_sig) {
            last_robot_sig = std::move(sig);
            record(RecordKind::Robot, std::move(d));
        }
    }

    // ---- scheduling -----------------------------------------------------

    void schedule(SimTime at, int cls, std::function<void()> fn) { queue.push({at, cls, seq++, std::move(fn)}); }

    SimTime draw_latency(const std::string& name) {
        const auto* dist = cfg.op.latency(name);
        RandomStream rng(cfg.seed, "operator.latency", ++op.latency_ordinal);
        return dist == nullptr ? SimTime::zero() : dist->draw(rng);
    }

    // ---- plan -----------------------------------------------------------

    const assembly::Step& step_of(const std::string& id) const { return *plan.find_step(id); }
    StepStatus status(const std::string& id) const { return progress.status.at(id); }
    bool done(const std::string& id) const { return status(id) == StepStatus::Done; }

    bool preds_done(const std::string& id) const {
        for (const auto& p : plan.predecessors(id))
            if (!done(p)) return false;
        return true;
    }

    bool items_ready(const assembly::Step& s) const { return assembly::items_available(plan, progress, s); }

    Location where(const std::string& item) const { return progress.item_location.at(item); }

    bool outstanding(const std::string& item) const {
        return where(item) == Location::Storage && !in_transit.contains(item) && !dropped.contains(item);
    }

    void set_status(const std::string& id, StepStatus st) {
        auto& cur = progress.status.at(id);
        if (cur == st) return;
        cur = st;
        const auto& s = step_of(id);
        record(RecordKind::Step, {{"step", id}, {"actor", assembly::to_string(s.actor)}, {"status", assembly::to_string(st)}});
        if (st == StepStatus::Ready && s.actor == Actor::Robot) proposed.insert(id);
        if (st == StepStatus::Ready || st == StepStatus::Done) {
            outbox.push_back({st == StepStatus::Ready ? "step_ready" : "step_done",
                              {{"step", id}, {"actor", std::string{assembly::to_string(s.actor)}}, {"description", s.description}}});
        }
    }

    bool update_readiness() {
        bool changed = false;
        for (const auto& id : topo) {
            if (status(id) == StepStatus::Pending && preds_done(id)) {
                set_status(id, StepStatus::Ready);
                changed = true;
            }
        }
        return changed;
    }

    // ---- robot actions --------------------------------------------------

    std::string first_label(const assembly::Step& s, bool components_only) const {
        for (const auto& n : s.needs) {
            const auto* item = plan.find_item(n);
            if (!components_only || item->kind == ItemKind::Component) return item->label;
        }
        return "workpiece";
    }

    RobotAction deliver_action(const std::string& item_id) const {
        const auto* item = plan.find_item(item_id);
        const bool tool = item->kind == ItemKind::Tool;
        return {tool ? ActionKind::FetchTool : ActionKind::DeliverComponent, item_id, item->label, "",
                tool ? cfg.robot.fetch_tool : cfg.robot.deliver_component};
    }

    RobotAction step_action(const assembly::Step& s) const {
        if (s.actor == Actor::Joint)
            return {ActionKind::Hold, s.id, first_label(s, true), s.description, s.nominal_duration};
        return {ActionKind::AssistStep, s.id, first_label(s, false), s.description, s.nominal_duration};
    }

    void build_sequence() {
        std::set<std::string> planned;
        for (const auto& id : topo) {
            const auto& s = step_of(id);
            for (const auto& n : s.needs) {
                if (planned.insert(n).second && where(n) == Location::Storage) sequence.push_back(deliver_action(n));
            }
            if (s.involves_robot()) sequence.push_back(step_action(s));
        }
    }

    void start(const RobotAction& a) {
        if (robot.enqueue(a) != robot::EnqueueResult::Accepted) {
            throw std::logic_error("robot refused " + std::string{robot::to_string(a.kind)});
        }
        if (is_delivery(a.kind)) {
            progress.item_location[a.target] = Location::RobotGripper;
            in_transit.insert(a.target);
        } else if (a.kind == ActionKind::AssistStep) {
            set_status(a.target, StepStatus::Active);
        } else if (a.kind == ActionKind::Hold) {
            set_status(a.target, StepStatus::Active);
            op.activity = Activity::Joint;
            op.step = a.target;
        }
    }

    bool still_needed(const RobotAction& a) const {
        if (is_delivery(a.kind)) return outstanding(a.target);
        if (a.kind == ActionKind::Hold) return !done(a.target) && op.waiting_joint == a.target;
        if (a.kind == ActionKind::AssistStep) return !done(a.target);
        return false;
    }

    bool step_startable(const assembly::Step& s) const {
        if (!preds_done(s.id) || !items_ready(s)) return false;
        if (s.actor == Actor::Joint) return op.waiting_joint == s.id && op.activity == Activity::None;
        return true;
    }

    bool robot_controller() {
        const auto mode = robot.state().mode;
        if (mode == RobotMode::Executing) return false;
        if (mode == RobotMode::Faulted) {
            if (!pending_reset) return false;
            pending_reset = false;
            start({ActionKind::Reset, "", "", "", cfg.robot.reset});
            return true;
        }
        if (retry) {
            auto a = std::move(*retry);
            retry.reset();
            if (still_needed(a)) {
                if (is_delivery(a.kind) || step_startable(step_of(a.target))) {
                    start(a);
                    return true;
                }
                retry = std::move(a);
                robot.block("waiting to retry");
                return false;
            }
        }
        if (conversational()) return conversational_controller();
        return sequence_controller();
    }

    bool sequence_controller() {
        while (head < sequence.size()) {
            const auto& a = sequence[head];
            if (is_delivery(a.kind) && !outstanding(a.target)) {
                ++head;
                continue;
            }
            if (gated() && (!token || stopped)) {
                robot.unblock();
                return false;
            }
            if (!is_delivery(a.kind) && !step_startable(step_of(a.target))) {
                robot.block(a.kind == ActionKind::Hold ? "waiting to hold the " + a.object
                                                       : "waiting to " + a.description);
                return false;
            }
            token = false;
            auto action = a;
            ++head;
            start(action);
            return true;
        }
        robot.unblock();
        return false;
    }

    bool conversational_controller() {
        if (stopped) {
            robot.unblock();
            return false;
        }
        for (const auto& j : hold_requested) {
            const auto& s = step_of(j);
            if (!done(j) && step_startable(s)) {
                start(step_action(s));
                return true;
            }
        }
        while (!requests.empty()) {
            const auto item = requests.front();
            requests.pop_front();
            if (!outstanding(item)) continue;
            start(deliver_action(item));
            return true;
        }
        std::string wait_reason;
        int looked = 0;
        for (const auto& id : topo) {
            const auto& s = step_of(id);
            if (!s.involves_robot() || done(id) || status(id) == StepStatus::Active) continue;
            for (const auto& n : s.needs) {
                if (outstanding(n)) {
                    start(deliver_action(n));
                    return true;
                }
            }
            if (looked == 0 && preds_done(id) && items_ready(s)) {
                if (s.actor == Actor::Robot) {
                    if (approved.contains(id)) {
                        start(step_action(s));
                        return true;
                    }
                    wait_reason = "waiting for your go-ahead to " + s.description;
                } else {
                    wait_reason = "waiting for you to ask me to hold the " + first_label(s, true);
                }
            }
            if (++looked >= 2) break;
        }
        if (wait_reason.empty()) robot.unblock();
        else robot.block(wait_reason);
        return false;
    }

    bool awaiting_token() const {
        if (!gated() || robot.state().mode != RobotMode::Idle || retry) return false;
        if (token && !stopped) return false;
        for (std::size_t i = head; i < sequence.size(); ++i) {
            if (!is_delivery(sequence[i].kind) || outstanding(sequence[i].target)) return true;
        }
        return false;
    }

    void on_robot_event(const robot::RobotEvent& ev) {
        const auto& a = ev.action;
        if (ev.kind == robot::RobotEvent::Kind::ActionDone) {
            json d{{"event", "action_done"}, {"action", robot::to_string(a.kind)}, {"target", a.target}};
            record(RecordKind::Robot, d);
            std::map<std::string, std::string> fields{{"action", std::string{robot::to_string(a.kind)}},
                                                      {"target", a.target}, {"item", a.object}};
            if (is_delivery(a.kind)) {
                progress.item_location[a.target] = Location::SharedBench;
                in_transit.erase(a.target);
                fields["requested"] = requested_items.contains(a.target) ? "yes" : "no";
            } else if (a.kind == ActionKind::AssistStep) {
                set_status(a.target, StepStatus::Done);
            } else if (a.kind == ActionKind::Hold) {
                set_status(a.target, StepStatus::Done);
                hold_requested.erase(a.target);
                op.waiting_joint.reset();
                op.activity = Activity::None;
                op.step.clear();
            }
            outbox.push_back({"action_done", fields});
            return;
        }

        const auto& f = *ev.failure;
        record(RecordKind::Robot, {{"event", "action_failed"},
                                   {"action", robot::to_string(a.kind)},
                                   {"target", a.target},
                                   {"reason", robot::to_string(f.reason)},
                                   {"problem", f.problem()}});
        if (is_delivery(a.kind)) {
            progress.item_location[a.target] = Location::Storage;
            in_transit.erase(a.target);
            if (f.reason == robot::FailureReason::Drop) dropped.insert(a.target);
            else retry = a;
        } else {
            set_status(a.target, StepStatus::Failed);
            retry = a;
            if (a.kind == ActionKind::Hold) {
                op.activity = Activity::None;
                op.step.clear();
            }
        }
        if (conversational()) {
            outbox.push_back({"action_failed",
                              {{"action", std::string{robot::to_string(a.kind)}},
                               {"target", a.target},
                               {"item", a.object},
                               {"reason", std::string{robot::to_string(f.reason)}},
                               {"problem", f.problem()}}});
        } else {
            if (cfg.communication) outbox.push_back({"action_failed", {{"reason", std::string{robot::to_string(f.reason)}}}});
            const auto entry = cfg.op.lookup({"fault"});
            const auto delay = draw_latency(entry.latency);
            schedule(now + delay, kOperatorClass, [this, entry] { begin_recovery(entry); });
        }
    }

    void flush_outbox() {
        auto events = std::move(outbox);
        outbox.clear();
        for (const auto& ev : events) {
            const auto fired = route_event(backend_->engine().script().event_rules(), ev);
            json d{{"outcome", "event"}, {"event", ev.kind}, {"fields", ev.fields}, {"fired", fired.size()}};
            json names = json::array();
            for (const auto& inv : fired) names.push_back(inv.dialogue);
            d["dialogues"] = names;
            record(RecordKind::Dialogue, d);
            backend_->publish_event(ev, now);
        }
    }

    // ---- operator -------------------------------------------------------

    std::optional<std::string> current_human_step() const {
        for (const auto& id : op.chain)
            if (!done(id)) return id;
        return std::nullopt;
    }

    void queue_speech(const std::string& key_specific, const std::string& key_generic, const std::string& label) {
        op.speech_queue.push_back({cfg.op.lookup({key_specific, key_generic}), label});
    }

    void start_work(const assembly::Step& s) {
        const auto dur = SimTime{static_cast<std::int64_t>(
            std::llround(static_cast<double>(s.nominal_duration.count()) * cfg.op.speed_factor))};
        set_status(s.id, StepStatus::Active);
        op.activity = Activity::Working;
        op.step = s.id;
        resume_work(std::max(dur, SimTime{1}));
    }

    void resume_work(SimTime left) {
        op.work_end = now + left;
        const auto token_id = ++op.work_token;
        schedule(op.work_end, kKernelClass, [this, token_id] {
            if (token_id != op.work_token || op.activity != Activity::Working) return;
            set_status(op.step, StepStatus::Done);
            op.activity = Activity::None;
            op.step.clear();
        });
    }

    bool operator_update() {
        const auto cur = current_human_step();
        if (!cur) return false;
        bool changed = false;
        const auto& c = step_of(*cur);

        if (conversational()) {
            std::vector<const assembly::Step*> horizon{&c};
            const auto it = std::find(op.chain.begin(), op.chain.end(), *cur);
            for (auto n = it + 1; n != op.chain.end(); ++n) {
                const auto& s = step_of(*n);
                if (s.actor == Actor::Human) {
                    horizon.push_back(&s);
                    break;
                }
            }
            for (const auto* s : horizon) {
                if (s->actor != Actor::Human) continue;
                for (const auto& n : s->needs) {
                    const auto* item = plan.find_item(n);
                    if (!outstanding(n) || op.requested_labels.contains(item->label)) continue;
                    op.requested_labels.insert(item->label);
                    queue_speech("request:" + n, item->kind == ItemKind::Tool ? "request:tool" : "request:component",
                                 item->label);
                }
            }
        }

        if (op.activity == Activity::None && preds_done(*cur) && items_ready(c)) {
            if (c.actor == Actor::Human && status(*cur) != StepStatus::Active) {
                start_work(c);
                changed = true;
            } else if (c.actor == Actor::Joint && op.waiting_joint != *cur) {
                op.waiting_joint = *cur;
                changed = true;
                if (conversational()) queue_speech("hold:" + *cur, "hold", first_label(c, true));
            }
        }
        return changed;
    }

    bool floor_free() const {
        auto s = backend_->session_snapshot(kOperatorSession);
        return !s || s->status == dialogue::SessionStatus::Idle || s->status == dialogue::SessionStatus::Terminal;
    }

    std::string render(const std::string& text, const std::string& label) const {
        return dialogue::render_text(text, {{"label", label}, {"last", op.last_said}});
    }

    /// Speech-only event body: speaks, or pauses on a cue for a human voice.
    void voice(const std::string& text) {
        if (text.empty()) return;
        if (opt.operator_speech) speak(text);
        else cue = text;
    }

    void speak(const std::string& text) {
        backend::RequestEnvelope env;
        env.session = kOperatorSession;
        env.text = text;
        env.context.time = now;
        op.last_said = text;
        try {
            backend_->handle_request(env);
        } catch (const Error& e) {
            spdlog::warn("operator utterance '{}' rejected: {}", text, e.what());
        }
    }

    void begin_recovery(const PolicyEntry& entry) {
        if (op.activity == Activity::Working) {
            op.work_left = op.work_end - now;
            op.paused = true;
            ++op.work_token;
        }
        op.activity = Activity::Recovering;
        schedule(now + cfg.op.recovery_work, kKernelClass, [this, entry] {
            for (const auto& item : dropped) progress.item_location[item] = Location::SharedBench;
            dropped.clear();
            op.activity = Activity::None;
            if (op.paused) {
                op.paused = false;
                op.activity = Activity::Working;
                resume_work(op.work_left);
            }
            if (!cfg.communication) {
                pending_reset = true;
                return;
            }
            const auto text = render(entry.say, op.slot_label);
            schedule(now, kOperatorClass, [this, text] { voice(text); });
        });
    }

    void operator_observe() {
        if (!cfg.communication) return;
        auto s = backend_->session_snapshot(kOperatorSession);
        if (s && s->status == dialogue::SessionStatus::AwaitingUser && !s->turn_log.empty() &&
            s->turn_log.back().speaker == dialogue::Speaker::Robot && s->turn_log.size() != op.prompt_handled &&
            !op.answer_scheduled) {
            op.prompt_handled = s->turn_log.size();
            std::vector<std::string> keys;
            if (s->pending_slot) {
                keys = {"slot:" + s->pending_slot->slot, "slot"};
            } else if (s->active_dialogue && backend_->engine().script().find_dialogue(*s->active_dialogue)->robot_initiated()) {
                keys = {"prompt:" + *s->active_dialogue, "prompt"};
            } else {
                keys = {"clarify"};
            }
            const auto entry = cfg.op.lookup(keys);
            const auto delay = draw_latency(entry.latency);
            op.answer_scheduled = true;
            schedule(now + delay, kOperatorClass, [this, entry] {
                op.answer_scheduled = false;
                if (entry.recover) begin_recovery(entry);
                else voice(render(entry.say, op.slot_label));
            });
        }
        if (awaiting_token() && !op.next_scheduled) {
            const auto entry = cfg.op.lookup({"next"});
            const auto delay = draw_latency(entry.latency);
            op.next_scheduled = true;
            schedule(now + delay, kOperatorClass, [this, entry] {
                op.next_scheduled = false;
                voice(render(entry.say, ""));
            });
        }
        if (!op.speech_queue.empty() && !op.speak_scheduled && floor_free() && !op.answer_scheduled) {
            const auto delay = draw_latency(op.speech_queue.front().entry.latency);
            op.speak_scheduled = true;
            schedule(now + delay, kOperatorClass, [this] {
                op.speak_scheduled = false;
                if (op.speech_queue.empty() || !floor_free()) return;
                auto next = std::move(op.speech_queue.front());
                op.speech_queue.pop_front();
                op.slot_label = next.label;
                voice(render(next.entry.say, next.label));
            });
        }
    }

    // ---- fulfillment ----------------------------------------------------

    std::vector<std::string> items_labelled(const std::string& label) const {
        std::vector<std::string> ids;
        for (const auto& item : plan.items)
            if (item.label == label) ids.push_back(item.id);
        return ids;
    }

    bool robot_doing(ActionKind kind, const std::set<std::string>& targets) const {
        const auto& s = robot.state();
        return s.mode == RobotMode::Executing && s.action && s.action->kind == kind && targets.contains(s.action->target);
    }

    backend::ResponseEnvelope fulfill(const backend::RequestEnvelope& req) override {
        backend::ResponseEnvelope r;
        r.session = req.session;
        r.end = true;
        r.speech = fulfill_speech(req, r);
        r.state_digest = state_digest();
        return r;
    }

    std::string fulfill_speech(const backend::RequestEnvelope& req, backend::ResponseEnvelope& r) {
        const std::string intent = req.intent.value_or("");
        auto slot = [&](const char* name) {
            auto it = req.slots.find(name);
            return it == req.slots.end() ? std::string{} : it->second;
        };

        if (cfg.mode == Mode::Baseline) {
            if (intent == "next") {
                stopped = false;
                if (awaiting_token()) token = true;
            } else if (intent == "stop") {
                stopped = true;
                token = false;
            } else if (intent == "reset") {
                if (robot.state().mode == RobotMode::Faulted) pending_reset = true;
            }
            robot_controller();
            return "OK.";
        }

        if (intent == "request_tool" || intent == "request_component") {
            const auto label = slot(intent == "request_tool" ? "tool" : "component");
            std::set<std::string> fresh;
            bool transit = false, fell = false;
            for (const auto& id : items_labelled(label)) {
                requested_items.insert(id);
                if (outstanding(id)) fresh.insert(id);
                transit = transit || in_transit.contains(id);
                fell = fell || dropped.contains(id);
            }
            if (fresh.empty()) {
                if (transit) return "I'm already bringing the " + label + ".";
                if (fell) return "The " + label + " fell. Please put it on the fixture.";
                return "The " + label + " is already on the bench.";
            }
            for (const auto& id : fresh) {
                if (std::find(requests.begin(), requests.end(), id) == requests.end()) requests.push_back(id);
            }
            robot_controller();
            if (robot_doing(ActionKind::FetchTool, fresh) || robot_doing(ActionKind::DeliverComponent, fresh))
                return "Bringing the " + label + " now.";
            return "I'm occupied right now. I'll bring the " + label + " next.";
        }

        if (intent == "request_hold") {
            const auto label = slot("component");
            for (const auto& id : topo) {
                const auto& s = step_of(id);
                if (s.actor != Actor::Joint || done(id) || first_label(s, true) != label) continue;
                hold_requested.insert(id);
                robot_controller();
                if (robot_doing(ActionKind::Hold, {id})) return "Holding the " + label + ".";
                return "I'll hold the " + label + " as soon as I'm free.";
            }
            return "I don't need to hold the " + label + " right now.";
        }

        if (intent == "approve") {
            for (const auto& id : topo) {
                if (!proposed.contains(id) || approved.contains(id) || done(id)) continue;
                approved.insert(id);
                robot_controller();
                const auto& s = step_of(id);
                if (robot_doing(ActionKind::AssistStep, {id})) return "Okay, I'm starting to " + s.description + ".";
                return "Okay, I'll " + s.description + " when I'm free.";
            }
            return "There is nothing waiting for your go-ahead.";
        }

        if (intent == "decline") return "Okay, I'll wait.";

        if (intent == "confirm_recovery") {
            if (robot.state().mode != RobotMode::Faulted) return "Okay.";
            pending_reset = true;
            robot_controller();
            return "Thank you. I'm resetting and will continue.";
        }

        if (intent == "query_status") return robot::status_text(robot.state());

        if (intent == "next_step") {
            for (const auto& id : topo) {
                const auto& s = step_of(id);
                if (s.actor != Actor::Robot || done(id)) continue;
                if (!approved.contains(id) && proposed.contains(id) && has_dialogue("confirm_next_step")) {
                    r.follow_up = "confirm_next_step";
                    r.end = false;
                }
                return "Next I will " + s.description + ".";
            }
            return "I have no steps of my own left.";
        }

        if (intent == "stop") {
            stopped = true;
            return "Okay, I'll stop after this action.";
        }
        if (intent == "resume") {
            stopped = false;
            robot_controller();
            return "Okay, carrying on.";
        }
        if (intent == "repeat") {
            auto s = backend_->session_snapshot(req.session);
            if (s) {
                for (auto it = s->turn_log.rbegin(); it != s->turn_log.rend(); ++it)
                    if (it->speaker == dialogue::Speaker::Robot) return "I said: " + it->text;
            }
            return "I haven't said anything yet.";
        }
        return "Okay.";
    }

    bool has_dialogue(const std::string& id) const { return backend_->engine().script().find_dialogue(id) != nullptr; }

    std::string state_digest() const override { return backend::digest(state_json().dump()); }

    json state_json() const {
        const auto& s = robot.state();
        json rj{{"mode", robot::to_string(s.mode)}, {"status", robot::status_text(s)}};
        if (s.action) {
            rj["action"] = robot::to_string(s.action->kind);
            rj["target"] = s.action->target;
            rj["remaining"] = to_seconds(s.remaining);
        }
        if (s.gripper) rj["gripper"] = *s.gripper;
        if (s.mode == RobotMode::Blocked) rj["blocked_reason"] = s.blocked_reason;
        if (s.failure) rj["failure"] = s.failure->problem();
        json steps = json::array();
        for (const auto& st : plan.steps) {
            steps.push_back({{"id", st.id},
                             {"actor", assembly::to_string(st.actor)},
                             {"status", assembly::to_string(progress.status.at(st.id))},
                             {"description", st.description}});
        }
        json items = json::object();
        for (const auto& [id, loc] : progress.item_location) items[id] = assembly::to_string(loc);
        return {{"t", to_seconds(now)}, {"robot", rj}, {"steps", steps}, {"items", items}};
    }

    // ---- loop -----------------------------------------------------------

    void settle() {
        for (int guard = 0; guard < 100000; ++guard) {
            bool changed = update_readiness();
            changed = robot_controller() || changed;
            changed = operator_update() || changed;
            sync_robot_record();
            if (!outbox.empty()) {
                flush_outbox();
                changed = true;
            }
            operator_observe();
            if (!changed) return;
        }
        throw std::logic_error("simulation failed to settle");
    }

    void finish(SimTime at, const char* reason) {
        if (at > robot.now()) {
            for (const auto& ev : robot.tick(at - robot.now())) (void)ev;
        }
        now = at;
        end_reason = reason;
        record(RecordKind::SimEnd, {{"reason", reason}});
        ended = true;
        cue.reset();
    }

    void check_complete() {
        if (!ended && progress.all_done()) finish(now, "complete");
    }

    void begin() {
        started = true;
        for (const auto& s : plan.steps)
            record(RecordKind::Step, {{"step", s.id}, {"actor", assembly::to_string(s.actor)}, {"status", "pending"}});
        sync_robot_record();
        settle();
        check_complete();
    }

    std::optional<SimTime> next_time() const {
        std::optional<SimTime> t = robot.next_event_time();
        if (!queue.empty() && (!t || queue.top().at < *t)) t = queue.top().at;
        return t;
    }

    /// Whether the next event is due before t, or at t and not operator speech.
    bool due_before(SimTime t) const {
        const auto rt = robot.next_event_time();
        if (rt && *rt <= t) return true;
        if (queue.empty()) return false;
        const auto& top = queue.top();
        return top.at < t || (top.at == t && top.cls < kOperatorClass);
    }

    void move_clock(SimTime t) {
        if (t > robot.now()) {
            auto events = robot.tick(t - robot.now());
            now = t;
            for (const auto& ev : events) on_robot_event(ev);
        }
        now = std::max(now, t);
    }

    bool step() {
        if (ended) return false;
        if (!started) {
            begin();
            return !ended;
        }
        if (cue) {
            cue.reset();
            settle();
            check_complete();
            return !ended;
        }
        const auto next = next_time();
        if (!next) {
            if (opt.live) return false;
            finish(std::max(now, cfg.max_time), "timeout");
            return false;
        }
        if (*next > cfg.max_time) {
            finish(cfg.max_time, "timeout");
            return false;
        }
        const auto rt = robot.next_event_time();
        if (rt && *rt == *next) {
            move_clock(*next);
        } else {
            move_clock(*next);
            auto ev = queue.top();
            queue.pop();
            ev.fn();
            if (cue) return true;
        }
        settle();
        check_complete();
        return !ended;
    }

    void advance_to(SimTime t) {
        if (!started) begin();
        while (!ended && (cue || due_before(t))) {
            if (cue) {
                cue.reset();
                settle();
                check_complete();
                continue;
            }
            if (next_time() > cfg.max_time) break;
            step();
        }
        if (ended) return;
        if (t > cfg.max_time) {
            finish(cfg.max_time, "timeout");
            return;
        }
        move_clock(t);
        settle();
        check_complete();
    }

    backend::ResponseEnvelope handle(const backend::RequestEnvelope& env) {
        if (!started) begin();
        if (ended) throw Error(Errc::ProtocolViolation, "the scenario has ended");
        cue.reset();
        auto copy = env;
        copy.context.time = now;
        if (copy.session == kOperatorSession && copy.kind != backend::RequestKind::Control) op.last_said = copy.text;
        auto resp = backend_->handle_request(copy);
        settle();
        check_complete();
        return resp;
    }
};

Simulation::Simulation(ScenarioConfig config, SimOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

Simulation::~Simulation() = default;

void Simulation::run() {
    while (impl_->step()) {
    }
}

bool Simulation::step() { return impl_->step(); }
void Simulation::advance_to(SimTime t) { impl_->advance_to(t); }

backend::ResponseEnvelope Simulation::say(const std::string& text) {
    backend::RequestEnvelope env;
    env.session = kOperatorSession;
    env.text = text;
    return impl_->handle(env);
}

backend::ResponseEnvelope Simulation::say_at(SimTime t, const std::string& text) {
    // Speaking at the cued instant answers the cue rather than skipping it.
    if (!impl_->cue || t > impl_->now) advance_to(t);
    while (!impl_->ended && !impl_->cue) {
        const auto next = impl_->next_time();
        if (!next || *next != impl_->now) break;
        impl_->step();
    }
    return say(text);
}

backend::ResponseEnvelope Simulation::handle_request(const backend::RequestEnvelope& env) { return impl_->handle(env); }

std::vector<backend::Invocation> Simulation::publish(const backend::Event& event) {
    if (!impl_->started) impl_->begin();
    impl_->outbox.push_back(event);
    const auto fired = route_event(impl_->backend_->engine().script().event_rules(), event);
    impl_->settle();
    impl_->check_complete();
    return fired;
}

const std::optional<std::string>& Simulation::cue() const { return impl_->cue; }
SimTime Simulation::now() const { return impl_->now; }
bool Simulation::ended() const { return impl_->ended; }
std::optional<SimTime> Simulation::next_event_time() const { return impl_->next_time(); }
const Trace& Simulation::trace() const { return impl_->trace; }
const ScenarioConfig& Simulation::config() const { return impl_->cfg; }
backend::Backend& Simulation::backend() { return *impl_->backend_; }

json Simulation::snapshot() const {
    auto j = impl_->state_json();
    j["scenario"] = impl_->cfg.name;
    j["mode"] = to_string(impl_->cfg.mode);
    j["communication"] = impl_->cfg.communication;
    j["ended"] = impl_->ended;
    if (impl_->ended) j["end_reason"] = impl_->end_reason;
    j["dropped_events"] = impl_->backend_->dropped_events();
    if (impl_->cue) j["cue"] = *impl_->cue;
    if (auto s = impl_->backend_->session_snapshot(kOperatorSession)) {
        json sj{{"status", dialogue::to_string(s->status)}, {"queued_initiations", s->queued_initiations.size()}};
        if (s->active_dialogue) sj["active_dialogue"] = *s->active_dialogue;
        if (s->pending_slot) sj["pending_slot"] = s->pending_slot->slot;
        j["session"] = sj;
    }
    return j;
}

metrics::MetricsReport Simulation::metrics() const {
    if (impl_->trace.records.empty()) return {};
    if (impl_->ended) return metrics::compute_metrics(impl_->trace);
    Trace copy = impl_->trace;
    copy.append(impl_->now, RecordKind::SimEnd, {{"reason", "running"}});
    return metrics::compute_metrics(copy);
}

Trace run_scenario(const ScenarioConfig& config) {
    Simulation sim(config);
    sim.run();
    return sim.trace();
}

std::vector<std::size_t> batch_order(std::size_t n, std::uint64_t order_seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RandomStream rng(order_seed, "batch.order");
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

std::vector<BatchEntry> run_batch_serial(const std::vector<ScenarioConfig>& configs, std::uint64_t order_seed) {
    const auto order = batch_order(configs.size(), order_seed);
    std::vector<BatchEntry> out(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        out[pos] = {order[pos], pos, run_scenario(configs[order[pos]])};
    }
    return out;
}

std::vector<BatchEntry> run_batch(const std::vector<ScenarioConfig>& configs, std::uint64_t order_seed) {
    const auto order = batch_order(configs.size(), order_seed);
    std::vector<BatchEntry> out(order.size());
    const auto n = static_cast<std::int64_t>(order.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t pos = 0; pos < n; ++pos) {
        const auto p = static_cast<std::size_t>(pos);
        out[p] = {order[p], p, run_scenario(configs[order[p]])};
    }
    return out;
}

}  // namespace coassembly::sim
