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

#include "coassembly/events.hpp"

namespace coassembly::backend {

bool rule_matches(const EventRule& rule, const Event& event) {
    if (rule.event != event.kind) return false;
    for (const auto& [k, v] : rule.where) {
        auto it = event.fields.find(k);
        if (it == event.fields.end() || it->second != v) return false;
    }
    return true;
}

std::vector<Invocation> route_event(const std::vector<EventRule>& rules, const Event& event) {
    std::vector<Invocation> out;
    for (const auto& rule : rules) {
        if (!rule_matches(rule, event)) continue;
        Invocation inv{rule.dialogue, {}};
        for (const auto& [k, v] : rule.payload) {
            if (!v.empty() && v.front() == '$') {
                auto it = event.fields.find(v.substr(1));
                inv.payload[k] = it == event.fields.end() ? std::string{} : it->second;
            } else {
                inv.payload[k] = v;
            }
        }
        out.push_back(std::move(inv));
    }
    return out;
}

}  // namespace coassembly::backend
