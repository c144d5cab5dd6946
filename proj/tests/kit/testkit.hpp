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
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "coassembly/error.hpp"
#include "coassembly/metrics.hpp"
#include "coassembly/protocol.hpp"
#include "coassembly/rng.hpp"
#include "coassembly/scenario.hpp"
#include "coassembly/script.hpp"
#include "coassembly/trace.hpp"

namespace coassembly::testkit {

std::filesystem::path data_path(const std::string& name);
sim::ScenarioConfig reference_config();
std::shared_ptr<const dialogue::ConversationScript> reference_script();
nlohmann::json load_json(const std::filesystem::path& path);

// Metrics with the conservation check applied; every test that produces a
// trace goes through here.
metrics::MetricsReport checked_metrics(const sim::Trace& trace);
std::uint64_t traces_checked();
std::uint64_t traces_not_closing();

/// Robot idle [0,5), executing [5,15), faulted [15,22), one robot step
/// pending throughout, SimEnd at 22 s.
sim::Trace three_interval_trace();

// ---- protocol ----

std::string random_text(RandomStream& rng, std::size_t max_len, bool allow_empty);
backend::RequestEnvelope random_request(RandomStream& rng);
backend::ResponseEnvelope random_response(RandomStream& rng);

struct MalformedCase {
    std::string name;
    std::string body;
    bool response = false;
    Errc expected = Errc::BadEnvelope;
};
std::vector<MalformedCase> malformed_cases();

struct RoundTripReport {
    std::size_t requests = 0;
    std::size_t responses = 0;
    std::vector<std::string> failures;
};
RoundTripReport protocol_round_trip(std::size_t n, std::uint64_t seed);

struct MalformedReport {
    std::size_t cases = 0;
    std::vector<std::string> failures;
};
MalformedReport check_malformed();

// ---- intent corpus ----

struct CorpusReport {
    std::size_t positive = 0;
    std::size_t positive_matched = 0;
    std::size_t out_of_domain = 0;
    std::size_t out_of_domain_rejected = 0;
    std::vector<std::string> failures;
};
CorpusReport check_corpus(const dialogue::ConversationScript& script, const nlohmann::json& corpus);

/// Random strings built from the script's vocabulary plus noise.
std::string random_utterance(const dialogue::ConversationScript& script, RandomStream& rng);

struct DeterminismReport {
    std::size_t strings = 0;
    std::size_t matched = 0;
    std::vector<std::string> failures;
};
DeterminismReport matcher_determinism(const dialogue::ConversationScript& script, std::size_t n, std::uint64_t seed);

// ---- dialogue liveness ----

struct LivenessReport {
    std::size_t sequences = 0;
    std::size_t user_turns = 0;
    std::size_t dispatches = 0;
    std::size_t initiations = 0;
    int bound = 0;
    int longest = 0;
    std::size_t violations = 0;
    std::vector<std::string> examples;
};
/// bound 0 means 2 * (|slots| * (r + 1) + 2) over the script's distinct slots.
LivenessReport liveness_fuzz(std::shared_ptr<const dialogue::ConversationScript> script, std::size_t sequences,
                             std::uint64_t seed, int bound = 0);

// ---- plan deadlock oracle ----

struct DeadlockReport {
    std::size_t plans = 0;
    std::size_t acyclic = 0;
    std::size_t states = 0;
    std::vector<std::string> failures;
};
/// Every precedence subset over n = 1..max_steps labelled steps.
DeadlockReport deadlock_oracle(int max_steps);

}  // namespace coassembly::testkit
