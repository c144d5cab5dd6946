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

#include "coassembly/trace.hpp"

#include <fstream>
#include <sstream>

#include "coassembly/error.hpp"

namespace coassembly::sim {

using nlohmann::json;

std::string_view to_string(RecordKind k) {
    switch (k) {
        case RecordKind::Utterance: return "utterance";
        case RecordKind::Robot: return "robot";
        case RecordKind::Step: return "step";
        case RecordKind::Dialogue: return "dialogue";
        case RecordKind::SimEnd: return "sim_end";
    }
    return "utterance";
}

std::optional<RecordKind> parse_record_kind(std::string_view s) {
    for (auto k : {RecordKind::Utterance, RecordKind::Robot, RecordKind::Step, RecordKind::Dialogue, RecordKind::SimEnd})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

json TraceRecord::to_json() const {
    json j = data;
    j["seq"] = seq;
    j["t"] = to_seconds(t);
    j["kind"] = to_string(kind);
    return j;
}

TraceRecord TraceRecord::from_json(const json& j) {
    auto bad = [](const std::string& why) { throw Error(Errc::MalformedTrace, why); };
    if (!j.is_object()) bad("record is not a JSON object");
    auto seq = j.find("seq");
    auto t = j.find("t");
    auto kind = j.find("kind");
    if (seq == j.end() || !seq->is_number_unsigned()) bad("record lacks an unsigned 'seq'");
    if (t == j.end() || !t->is_number() || t->get<double>() < 0) bad("record lacks a non-negative 't'");
    if (kind == j.end() || !kind->is_string()) bad("record lacks a 'kind'");
    auto k = parse_record_kind(kind->get<std::string>());
    if (!k) bad("unknown record kind '" + kind->get<std::string>() + "'");
    TraceRecord r;
    r.seq = seq->get<std::uint64_t>();
    r.t = from_seconds(t->get<double>());
    r.kind = *k;
    r.data = j;
    r.data.erase("seq");
    r.data.erase("t");
    r.data.erase("kind");
    return r;
}

const TraceRecord& Trace::append(SimTime t, RecordKind kind, json data) {
    const std::uint64_t seq = records.empty() ? 0 : records.back().seq + 1;
    records.push_back({seq, t, kind, std::move(data)});
    return records.back();
}

bool Trace::ended() const { return !records.empty() && records.back().kind == RecordKind::SimEnd; }

void Trace::check() const {
    auto bad = [](std::size_t i, const std::string& why) {
        throw Error(Errc::MalformedTrace, "record " + std::to_string(i) + ": " + why);
    };
    if (records.empty()) throw Error(Errc::MalformedTrace, "record 0: trace is empty");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (i > 0 && r.seq <= records[i - 1].seq) bad(i, "sequence numbers must increase");
        if (i > 0 && r.t < records[i - 1].t) bad(i, "timestamp decreases");
        if (r.kind == RecordKind::SimEnd && i + 1 != records.size()) bad(i, "sim_end must be the last record");
    }
    if (records.back().kind != RecordKind::SimEnd) bad(records.size() - 1, "trace does not end with sim_end");
}

void Trace::write_jsonl(std::ostream& out) const {
    for (const auto& r : records) out << r.to_json().dump() << '\n';
}

std::string Trace::to_jsonl() const {
    std::ostringstream out;
    write_jsonl(out);
    return out.str();
}

Trace Trace::read_jsonl(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(Errc::MalformedTrace, "record " + std::to_string(index) + ": invalid JSON");
        try {
            trace.records.push_back(TraceRecord::from_json(j));
        } catch (const Error& e) {
            throw Error(Errc::MalformedTrace, "record " + std::to_string(index) + ": " + e.what());
        }
        ++index;
    }
    trace.check();
    return trace;
}

Trace Trace::parse_jsonl(std::string_view text) {
    std::istringstream in{std::string{text}};
    return read_jsonl(in);
}

Trace Trace::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open trace " + path);
    return read_jsonl(in);
}

void Trace::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write trace " + path);
    write_jsonl(out);
}

}  // namespace coassembly::sim
