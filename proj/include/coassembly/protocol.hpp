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

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "coassembly/mode.hpp"
#include "coassembly/time.hpp"

namespace coassembly::backend {

inline constexpr int kProtocolVersion = 1;

using SlotMap = std::map<std::string, std::string>;

enum class RequestKind { Utterance, SlotAnswer, Control };

std::string_view to_string(RequestKind kind);

struct RequestContext {
    std::optional<Mode> mode;
    std::optional<SimTime> time;

    bool operator==(const RequestContext&) const = default;
};

/// Front-end to back-end message. Dispatches produced by the dialogue engine
/// additionally carry the matched intent and its filled slots.
struct RequestEnvelope {
    int version = kProtocolVersion;
    std::string session;
    RequestKind kind = RequestKind::Utterance;
    std::string text;
    RequestContext context;
    std::optional<std::string> intent;
    SlotMap slots;

    bool operator==(const RequestEnvelope&) const = default;
};

struct ResponseEnvelope {
    int version = kProtocolVersion;
    std::string session;
    std::string speech;
    std::optional<std::string> follow_up;
    bool end = false;
    std::string state_digest;

    bool operator==(const ResponseEnvelope&) const = default;
};

nlohmann::json to_json(const RequestEnvelope& env);
nlohmann::json to_json(const ResponseEnvelope& env);

/// Strict decoding. Schema violations throw Error(BadEnvelope); a context
/// mode outside the known set throws Error(UnknownMode).
RequestEnvelope parse_request(const nlohmann::json& j);
RequestEnvelope parse_request(std::string_view body);
ResponseEnvelope parse_response(const nlohmann::json& j);
ResponseEnvelope parse_response(std::string_view body);

/// Short stable digest (16 hex chars, FNV-1a 64) of a state snapshot.
std::string digest(std::string_view canonical_text);

}  // namespace coassembly::backend
