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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coassembly/backend.hpp"
#include "coassembly/metrics.hpp"
#include "coassembly/scenario.hpp"
#include "coassembly/trace.hpp"

namespace coassembly::sim {

struct SimOptions {
    /// false: the operator model still works, notices and recovers, but a
    /// human supplies its voice. Where the model would speak the kernel
    /// pauses with a cue (see Simulation::cue).
    bool operator_speech = true;
    /// Live runs wait for input when nothing is scheduled instead of ending.
    bool live = false;
    std::function<void(const TraceRecord&)> on_record;
};

/// Discrete-event co-simulation of operator, dialogue engine, robot and plan
/// over a virtual clock. Single-threaded; callers serialize access.
///
/// Events at one instant run robot completions first, then kernel events,
/// then operator speech, each group in scheduling order.
class Simulation {
public:
    static constexpr const char* kOperatorSession = "operator";

    explicit Simulation(ScenarioConfig config, SimOptions options = {});
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs to SimEnd (headless) or to quiescence (live).
    void run();
    /// Processes one event. False once ended, or when a live run has nothing
    /// scheduled.
    bool step();
    /// Processes everything before t and the non-speech events at t, then
    /// moves the clock to t. Never moves the clock backwards.
    void advance_to(SimTime t);

    /// The operator says `text` at the current time.
    backend::ResponseEnvelope say(const std::string& text);
    /// Advances to t, runs operator events at t up to the first cue, then
    /// says `text`. Typing the scripted lines at the scripted times this way
    /// reproduces the scripted run.
    backend::ResponseEnvelope say_at(SimTime t, const std::string& text);
    backend::ResponseEnvelope handle_request(const backend::RequestEnvelope& env);
    std::vector<backend::Invocation> publish(const backend::Event& event);

    /// Line the scripted operator would have said, when paused on one.
    const std::optional<std::string>& cue() const;

    SimTime now() const;
    bool ended() const;
    std::optional<SimTime> next_event_time() const;
    const Trace& trace() const;
    nlohmann::json snapshot() const;
    /// Metrics of the trace so far (closed at the current time if running).
    metrics::MetricsReport metrics() const;
    const ScenarioConfig& config() const;
    backend::Backend& backend();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Headless run of one scenario. Deterministic in the config.
Trace run_scenario(const ScenarioConfig& config);

struct BatchEntry {
    std::size_t config_index = 0;
    std::size_t position = 0;
    Trace trace;
};

/// Seeded permutation of [0, n).
std::vector<std::size_t> batch_order(std::size_t n, std::uint64_t order_seed);

/// Runs configs in a seeded shuffled order; entry i is the i-th run. Runs
/// are spread over OpenMP threads since they share nothing mutable.
std::vector<BatchEntry> run_batch(const std::vector<ScenarioConfig>& configs, std::uint64_t order_seed);
/// One run after another on the calling thread. Same result as run_batch.
std::vector<BatchEntry> run_batch_serial(const std::vector<ScenarioConfig>& configs, std::uint64_t order_seed);

}  // namespace coassembly::sim
