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
#include <string>
#include <vector>

namespace coassembly::backend {

/// A simulator or robot event offered to the event rules, e.g.
/// kind "action_failed" with fields {reason: drop, item: planet carrier}.
struct Event {
    std::string kind;
    std::map<std::string, std::string> fields;
};

/// When `event` matches (kind equal and every `where` field equal), open
/// `dialogue` with a payload built from `payload`: values starting with '$'
/// copy the named event field, anything else is a literal.
struct EventRule {
    std::string event;
    std::map<std::string, std::string> where;
    std::string dialogue;
    std::map<std::string, std::string> payload;
};

struct Invocation {
    std::string dialogue;
    std::map<std::string, std::string> payload;

    bool operator==(const Invocation&) const = default;
};

bool rule_matches(const EventRule& rule, const Event& event);

/// Invocations of every matching rule, in rule-declaration order.
std::vector<Invocation> route_event(const std::vector<EventRule>& rules, const Event& event);

}  // namespace coassembly::backend
