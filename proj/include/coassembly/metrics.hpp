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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "coassembly/time.hpp"
#include "coassembly/trace.hpp"

namespace coassembly::metrics {

/// Robot time splits three ways, and the parts add up to execution_time:
///   busy      robot executing (resets included)
///   downtime  robot idle, blocked or faulted while a robot or joint step
///             is not done
///   idle      robot idle with no robot work left
struct MetricsReport {
    SimTime execution_time{0};
    SimTime robot_downtime{0};
    SimTime robot_busy{0};
    SimTime idle_unaccountable{0};
    std::uint64_t user_turns = 0;
    std::uint64_t robot_turns = 0;
    std::uint64_t slot_prompts = 0;
    std::uint64_t failures = 0;
    std::uint64_t dropped_events = 0;

    bool accounting_closes() const noexcept {
        return robot_busy + robot_downtime + idle_unaccountable == execution_time;
    }

    nlohmann::json to_json() const;
    static MetricsReport from_json(const nlohmann::json& j);
    bool operator==(const MetricsReport&) const = default;
};

/// Throws Error(MalformedTrace).
MetricsReport compute_metrics(const sim::Trace& trace);

struct ComparisonReport {
    double execution_time_reduction_pct = 0.0;
    double downtime_reduction_pct = 0.0;
    MetricsReport baseline;
    MetricsReport proposed;

    nlohmann::json to_json() const;
};

/// 100 * (base - prop) / base, rounded half-up to one decimal.
double reduction_pct(SimTime base, SimTime prop);

/// Throws Error(ZeroBaseline) unless the baseline has positive execution
/// time and downtime.
ComparisonReport compare(const MetricsReport& base, const MetricsReport& prop);

inline constexpr std::array<std::string_view, 5> kAspects{"clarity", "naturalness", "ease", "stress", "overall"};

struct QuestionnaireRecord {
    std::array<double, 5> ratings{};  // indexed like kAspects, each in [0, 10]
};

struct QuestionnaireSummary {
    std::array<double, 5> aspect_mean{};
    double overall_mean = 0.0;
    std::size_t count = 0;

    nlohmann::json to_json() const;
};

/// Means rounded to one decimal. Throws Error(EmptySample), or
/// std::invalid_argument for a rating outside [0, 10].
QuestionnaireSummary aggregate_questionnaire(const std::vector<QuestionnaireRecord>& records);
std::vector<QuestionnaireRecord> questionnaire_from_json(const nlohmann::json& j);

/// Aligned-column table, one row per named report.
std::string render_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string csv_header();
std::string csv_row(const std::string& name, const MetricsReport& r);

}  // namespace coassembly::metrics
