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

#include <filesystem>

#include "coassembly/error.hpp"
#include "coassembly/sim.hpp"
#include "coassembly/trace.hpp"
#include "kit/testkit.hpp"

using namespace coassembly;
using namespace coassembly::sim;
using nlohmann::json;

namespace {

std::string malformed_reason(std::string_view text) {
    try {
        Trace::parse_jsonl(text);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MalformedTrace);
        return e.what();
    }
    FAIL("expected MalformedTrace");
    return {};
}

}  // namespace

TEST_CASE("records serialize with reserved keys") {
    Trace t;
    t.append(from_seconds(1.25), RecordKind::Utterance, {{"speaker", "user"}, {"text", "status"}});
    const auto j = t.records[0].to_json();
    CHECK(j == json{{"seq", 0}, {"t", 1.25}, {"kind", "utterance"}, {"speaker", "user"}, {"text", "status"}});
    CHECK(TraceRecord::from_json(j) == t.records[0]);
    CHECK(t.append(from_seconds(2), RecordKind::SimEnd, {}).seq == 1);
    CHECK(t.ended());
}

TEST_CASE("JSONL round trip") {
    const auto hand = testkit::three_interval_trace();
    const auto text = hand.to_jsonl();
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(hand.records.size()));
    CHECK(Trace::parse_jsonl(text) == hand);
    CHECK(Trace::parse_jsonl(text).to_jsonl() == text);
    // Blank lines are ignored.
    CHECK(Trace::parse_jsonl("\n" + text + "\n\n") == hand);

    const auto path = (std::filesystem::temp_directory_path() / "coassembly-trace-test.jsonl").string();
    hand.save(path);
    CHECK(Trace::load(path) == hand);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(Trace::load("/nonexistent/trace.jsonl"), Error);
}

TEST_CASE("simulated traces round trip") {
    auto cfg = testkit::reference_config();
    const auto trace = run_scenario(cfg);
    CHECK_NOTHROW(trace.check());
    CHECK(Trace::parse_jsonl(trace.to_jsonl()) == trace);
}

TEST_CASE("check rejects broken structure") {
    Trace empty;
    CHECK_THROWS_AS(empty.check(), Error);

    Trace unended = testkit::three_interval_trace();
    unended.records.pop_back();
    CHECK_THROWS_AS(unended.check(), Error);

    Trace backwards = testkit::three_interval_trace();
    backwards.records[2].t = SimTime{0};
    backwards.records[1].t = from_seconds(3);
    CHECK_THROWS_AS(backwards.check(), Error);

    Trace dup = testkit::three_interval_trace();
    dup.records[2].seq = dup.records[1].seq;
    CHECK_THROWS_AS(dup.check(), Error);

    Trace early_end = testkit::three_interval_trace();
    std::swap(early_end.records[3].kind, early_end.records[5].kind);
    CHECK_THROWS_AS(early_end.check(), Error);
}

TEST_CASE("malformed JSONL names the offending record") {
    const std::string end = R"({"seq":1,"t":0,"kind":"sim_end"})";
    CHECK(malformed_reason("{\"seq\":0,\"t\":0,\"kind\":\"robot\"\n" + end).find("record 0") != std::string::npos);
    CHECK(malformed_reason(R"({"seq":0,"t":0,"kind":"robot"})" "\n" R"({"seq":1,"t":0,"kind":"weather"})")
              .find("record 1") != std::string::npos);
    CHECK(malformed_reason(R"({"seq":-1,"t":0,"kind":"robot"})" "\n" + end).find("seq") != std::string::npos);
    CHECK(malformed_reason(R"({"seq":0,"t":-2,"kind":"robot"})" "\n" + end).find("'t'") != std::string::npos);
    CHECK(malformed_reason(R"({"seq":0,"t":0})" "\n" + end).find("kind") != std::string::npos);
    CHECK(malformed_reason(R"([1,2])").find("object") != std::string::npos);
    CHECK(malformed_reason(R"({"seq":0,"t":0,"kind":"robot"})").find("sim_end") != std::string::npos);
    CHECK(malformed_reason("").find("empty") != std::string::npos);
}

TEST_CASE("record kind names") {
    for (auto k : {RecordKind::Utterance, RecordKind::Robot, RecordKind::Step, RecordKind::Dialogue, RecordKind::SimEnd})
        CHECK(parse_record_kind(to_string(k)) == k);
    CHECK_FALSE(parse_record_kind("Robot"));
}
