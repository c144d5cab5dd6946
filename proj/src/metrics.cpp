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

#include "coassembly/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "coassembly/error.hpp"

namespace coassembly::metrics {

using nlohmann::json;
using sim::RecordKind;

json MetricsReport::to_json() const {
    return {
        {"execution_time", to_seconds(execution_time)},
        {"robot_downtime", to_seconds(robot_downtime)},
        {"robot_busy", to_seconds(robot_busy)},
        {"idle_unaccountable", to_seconds(idle_unaccountable)},
        {"user_turns", user_turns},
        {"robot_turns", robot_turns},
        {"slot_prompts", slot_prompts},
        {"failures", failures},
        {"dropped_events", dropped_events},
    };
}

MetricsReport MetricsReport::from_json(const json& j) {
    MetricsReport r;
    r.execution_time = from_seconds(j.at("execution_time").get<double>());
    r.robot_downtime = from_seconds(j.at("robot_downtime").get<double>());
    r.robot_busy = from_seconds(j.at("robot_busy").get<double>());
    r.idle_unaccountable = from_seconds(j.at("idle_unaccountable").get<double>());
    r.user_turns = j.at("user_turns").get<std::uint64_t>();
    r.robot_turns = j.at("robot_turns").get<std::uint64_t>();
    r.slot_prompts = j.at("slot_prompts").get<std::uint64_t>();
    r.failures = j.at("failures").get<std::uint64_t>();
    r.dropped_events = j.at("dropped_events").get<std::uint64_t>();
    return r;
}

namespace {

std::string str_field(const json& data, const char* key) {
    auto it = data.find(key);
    return it != data.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

}  // namespace

MetricsReport compute_metrics(const sim::Trace& trace) {
    trace.check();
    MetricsReport r;
    std::string mode = "idle";
    std::map<std::string, bool> robot_work_open;  // robot/joint step -> not done
    std::size_t open = 0;
    SimTime cursor = trace.records.front().t;

    for (const auto& rec : trace.records) {
        const SimTime dt = rec.t - cursor;
        if (dt > SimTime::zero()) {
            if (mode == "executing") r.robot_busy += dt;
            else if (open > 0) r.robot_downtime += dt;
            else r.idle_unaccountable += dt;
        }
        cursor = rec.t;

        switch (rec.kind) {
            case RecordKind::Robot: {
                const auto event = str_field(rec.data, "event");
                if (event == "mode") mode = str_field(rec.data, "mode");
                else if (event == "action_failed") ++r.failures;
                break;
            }
            case RecordKind::Step: {
                const auto actor = str_field(rec.data, "actor");
                if (actor != "robot" && actor != "joint") break;
                const bool not_done = str_field(rec.data, "status") != "done";
                auto [it, inserted] = robot_work_open.try_emplace(str_field(rec.data, "step"), false);
                if (it->second != not_done) {
                    if (not_done) ++open;
                    else --open;
                    it->second = not_done;
                }
                break;
            }
            case RecordKind::Utterance:
                if (str_field(rec.data, "speaker") == "user") ++r.user_turns;
                else ++r.robot_turns;
                break;
            case RecordKind::Dialogue: {
                const auto outcome = str_field(rec.data, "outcome");
                if (outcome == "prompt_slot") ++r.slot_prompts;
                if (outcome == "event") {
                    auto fired = rec.data.find("fired");
                    if (fired != rec.data.end() && fired->is_number() && fired->get<long long>() == 0) ++r.dropped_events;
                }
                break;
            }
            case RecordKind::SimEnd:
                break;
        }
    }
    r.execution_time = trace.records.back().t - trace.records.front().t;
    return r;
}

json ComparisonReport::to_json() const {
    return {
        {"execution_time_reduction_pct", execution_time_reduction_pct},
        {"downtime_reduction_pct", downtime_reduction_pct},
        {"baseline", baseline.to_json()},
        {"conversational", proposed.to_json()},
    };
}

double reduction_pct(SimTime base, SimTime prop) {
    // tenths of a percent: floor((2000 * (b - p) + b) / (2b)) is half-up
    const auto b = static_cast<__int128>(base.count());
    const auto p = static_cast<__int128>(prop.count());
    const __int128 num = 2000 * (b - p) + b;
    const __int128 den = 2 * b;
    __int128 q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
    return static_cast<double>(static_cast<long long>(q)) / 10.0;
}

ComparisonReport compare(const MetricsReport& base, const MetricsReport& prop) {
    if (base.execution_time <= SimTime::zero()) throw Error(Errc::ZeroBaseline, "baseline execution time is zero");
    if (base.robot_downtime <= SimTime::zero()) throw Error(Errc::ZeroBaseline, "baseline robot downtime is zero");
    ComparisonReport c;
    c.execution_time_reduction_pct = reduction_pct(base.execution_time, prop.execution_time);
    c.downtime_reduction_pct = reduction_pct(base.robot_downtime, prop.robot_downtime);
    c.baseline = base;
    c.proposed = prop;
    return c;
}

json QuestionnaireSummary::to_json() const {
    json aspects = json::object();
    for (std::size_t i = 0; i < kAspects.size(); ++i) aspects[std::string{kAspects[i]}] = aspect_mean[i];
    return {{"count", count}, {"aspects", aspects}, {"overall", overall_mean}};
}

namespace {

double round1(double sum, double n) {
    // nudge so that exact .x5 values stored slightly low still round up
    return std::floor(sum * 10.0 / n + 0.5 + 1e-9) / 10.0;
}

}  // namespace

QuestionnaireSummary aggregate_questionnaire(const std::vector<QuestionnaireRecord>& records) {
    if (records.empty()) throw Error(Errc::EmptySample, "no questionnaire records");
    QuestionnaireSummary s;
    s.count = records.size();
    std::array<double, 5> sums{};
    double total = 0.0;
    for (const auto& rec : records) {
        for (std::size_t i = 0; i < sums.size(); ++i) {
            const double v = rec.ratings[i];
            if (!(v >= 0.0 && v <= 10.0)) throw std::invalid_argument("rating outside [0, 10]");
            sums[i] += v;
            total += v;
        }
    }
    const auto n = static_cast<double>(records.size());
    for (std::size_t i = 0; i < sums.size(); ++i) s.aspect_mean[i] = round1(sums[i], n);
    s.overall_mean = round1(total, n * static_cast<double>(sums.size()));
    return s;
}

std::vector<QuestionnaireRecord> questionnaire_from_json(const json& j) {
    std::vector<QuestionnaireRecord> out;
    const json& list = j.is_object() ? j.at("records") : j;
    for (const auto& item : list) {
        QuestionnaireRecord r;
        for (std::size_t i = 0; i < kAspects.size(); ++i) r.ratings[i] = item.at(std::string{kAspects[i]}).get<double>();
        out.push_back(r);
    }
    return out;
}

namespace {

std::string secs(SimTime t) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << to_seconds(t);
    return s.str();
}

}  // namespace

std::string render_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    const std::vector<std::string> header{"scenario", "exec_s", "downtime_s", "busy_s", "idle_s",
                                          "user", "robot", "prompts", "failures", "dropped"};
    std::vector<std::vector<std::string>> cells{header};
    for (const auto& [name, r] : rows) {
        cells.push_back({name, secs(r.execution_time), secs(r.robot_downtime), secs(r.robot_busy),
                         secs(r.idle_unaccountable), std::to_string(r.user_turns), std::to_string(r.robot_turns),
                         std::to_string(r.slot_prompts), std::to_string(r.failures), std::to_string(r.dropped_events)});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0) out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
            else out << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
        }
        out << '\n';
    }
    return out.str();
}

std::string csv_header() {
    return "scenario,execution_time,robot_downtime,robot_busy,idle_unaccountable,user_turns,robot_turns,slot_prompts,"
           "failures,dropped_events";
}

std::string csv_row(const std::string& name, const MetricsReport& r) {
    std::ostringstream out;
    out << name << ',' << secs(r.execution_time) << ',' << secs(r.robot_downtime) << ',' << secs(r.robot_busy) << ','
        << secs(r.idle_unaccountable) << ',' << r.user_turns << ',' << r.robot_turns << ',' << r.slot_prompts << ','
        << r.failures << ',' << r.dropped_events;
    return out.str();
}

}  // namespace coassembly::metrics
