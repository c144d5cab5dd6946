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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "coassembly/time.hpp"

namespace coassembly::sim {

enum class RecordKind { Utterance, Robot, Step, Dialogue, SimEnd };

std::string_view to_string(RecordKind k);
std::optional<RecordKind> parse_record_kind(std::string_view s);

/// One timestamped line of a trace. `data` holds the kind-specific fields;
/// the reserved keys seq, t and kind are added on serialization.
struct TraceRecord {
    std::uint64_t seq = 0;
    SimTime t{0};
    RecordKind kind = RecordKind::Utterance;
    nlohmann::json data = nlohmann::json::object();

    nlohmann::json to_json() const;
    static TraceRecord from_json(const nlohmann::json& j);

    bool operator==(const TraceRecord&) const = default;
};

struct Trace {
    std::vector<TraceRecord> records;

    /// Appends with the next sequence number.
    const TraceRecord& append(SimTime t, RecordKind kind, nlohmann::json data);
    bool ended() const;

    /// Throws Error(MalformedTrace) naming the first offending record.
    void check() const;

    void write_jsonl(std::ostream& out) const;
    std::string to_jsonl() const;
    /// Parses and checks. Throws Error(MalformedTrace).
    static Trace read_jsonl(std::istream& in);
    static Trace parse_jsonl(std::string_view text);
    static Trace load(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const Trace&) const = default;
};

}  // namespace coassembly::sim
