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

#include "coassembly/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "coassembly/error.hpp"

namespace coassembly {

std::string_view to_string(Mode mode) {
    return mode == Mode::Conversational ? "conversational" : "baseline";
}

Mode parse_mode(std::string_view text) {
    if (text == "conversational") return Mode::Conversational;
    if (text == "baseline") return Mode::Baseline;
    throw Error(Errc::UnknownMode, "unknown mode '" + std::string{text} + "'");
}

}  // namespace coassembly

namespace coassembly::backend {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::BadEnvelope, why); }

void require_object(const json& j) {
    if (!j.is_object()) bad("envelope is not a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : j.items()) {
        if (!allowed.contains(k)) bad("unknown field '" + k + "'");
    }
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) bad(std::string{"missing field '"} + name + "'");
    return *it;
}

int parse_version(const json& j) {
    const auto& v = field(j, "version");
    if (!v.is_number_integer()) bad("'version' must be an integer");
    if (v.get<long long>() != kProtocolVersion) bad("unsupported version " + v.dump());
    return kProtocolVersion;
}

std::string parse_string(const json& j, const char* name, bool non_empty) {
    const auto& v = field(j, name);
    if (!v.is_string()) bad(std::string{"'"} + name + "' must be a string");
    auto s = v.get<std::string>();
    if (non_empty && s.empty()) bad(std::string{"'"} + name + "' must not be empty");
    return s;
}

json parse_body(std::string_view body) {
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) bad("body is not valid JSON");
    return j;
}

}  // namespace

std::string_view to_string(RequestKind kind) {
    switch (kind) {
        case RequestKind::Utterance: return "utterance";
        case RequestKind::SlotAnswer: return "slot-answer";
        case RequestKind::Control: return "control";
    }
    return "utterance";
}

json to_json(const RequestEnvelope& env) {
    json j;
    j["version"] = env.version;
    j["session"] = env.session;
    j["kind"] = std::string{to_string(env.kind)};
    j["text"] = env.text;
    json ctx = json::object();
    if (env.context.mode) ctx["mode"] = std::string{to_string(*env.context.mode)};
    if (env.context.time) ctx["t"] = to_seconds(*env.context.time);
    j["context"] = std::move(ctx);
    if (env.intent) j["intent"] = *env.intent;
    if (!env.slots.empty()) j["slots"] = env.slots;
    return j;
}

json to_json(const ResponseEnvelope& env) {
    json j;
    j["version"] = env.version;
    j["session"] = env.session;
    j["speech"] = env.speech;
    if (env.follow_up) j["follow_up"] = *env.follow_up;
    j["end"] = env.end;
    j["state_digest"] = env.state_digest;
    return j;
}

RequestEnvelope parse_request(const json& j) {
    require_object(j);
    reject_unknown(j, {"version", "session", "kind", "text", "context", "intent", "slots"});
    RequestEnvelope env;
    env.version = parse_version(j);
    env.session = parse_string(j, "session", true);
    const auto kind = parse_string(j, "kind", true);
    if (kind == "utterance") env.kind = RequestKind::Utterance;
    else if (kind == "slot-answer") env.kind = RequestKind::SlotAnswer;
    else if (kind == "control") env.kind = RequestKind::Control;
    else bad("unknown kind '" + kind + "'");
    env.text = parse_string(j, "text", false);

    if (auto it = j.find("context"); it != j.end()) {
        if (!it->is_object()) bad("'context' must be an object");
        reject_unknown(*it, {"mode", "t"});
        if (auto m = it->find("mode"); m != it->end()) {
            if (!m->is_string()) bad("'context.mode' must be a string");
            env.context.mode = parse_mode(m->get<std::string>());
        }
        if (auto t = it->find("t"); t != it->end()) {
            if (!t->is_number()) bad("'context.t' must be a number");
            const double s = t->get<double>();
            if (!std::isfinite(s) || s < 0) bad("'context.t' must be a non-negative finite number");
            env.context.time = from_seconds(s);
        }
    }
    if (auto it = j.find("intent"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>().empty()) bad("'intent' must be a non-empty string");
        env.intent = it->get<std::string>();
    }
    if (auto it = j.find("slots"); it != j.end()) {
        if (!it->is_object()) bad("'slots' must be an object");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) bad("slot '" + k + "' must be a string");
            env.slots[k] = v.get<std::string>();
        }
    }
    return env;
}

RequestEnvelope parse_request(std::string_view body) { return parse_request(parse_body(body)); }

ResponseEnvelope parse_response(const json& j) {
    require_object(j);
    reject_unknown(j, {"version", "session", "speech", "follow_up", "end", "state_digest"});
    ResponseEnvelope env;
    env.version = parse_version(j);
    env.session = parse_string(j, "session", true);
    env.speech = parse_string(j, "speech", true);
    if (auto it = j.find("follow_up"); it != j.end() && !it->is_null()) {
        if (!it->is_string() || it->get<std::string>().empty()) bad("'follow_up' must be a non-empty string");
        env.follow_up = it->get<std::string>();
    }
    const auto& end = field(j, "end");
    if (!end.is_boolean()) bad("'end' must be a boolean");
    env.end = end.get<bool>();
    env.state_digest = parse_string(j, "state_digest", false);
    return env;
}

ResponseEnvelope parse_response(std::string_view body) { return parse_response(parse_body(body)); }

std::string digest(std::string_view canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace coassembly::backend
