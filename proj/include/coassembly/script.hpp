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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "coassembly/events.hpp"
#include "coassembly/intent.hpp"

namespace coassembly::dialogue {

inline constexpr int kScriptVersion = 1;

using SlotMap = std::map<std::string, std::string>;

/// Opened by the operator: the dialogue runs when its intent matches.
struct UserIntentTrigger {
    std::string intent;
};
/// Opened by the system through the dialogue API, starting with a robot turn.
struct ApiCallTrigger {
    std::string api;
};
using Trigger = std::variant<UserIntentTrigger, ApiCallTrigger>;

struct DialogueDef {
    std::string id;
    Trigger trigger;
    std::string reply_template;
    bool dispatch = false;
    std::optional<std::string> follow_up;
    std::map<std::string, std::string> slot_prompts;
    int max_slot_retries = 2;
    /// Robot-opened dialogues only: whether the opening turn waits for an answer.
    bool expects_reply = true;

    bool robot_initiated() const noexcept { return std::holds_alternative<ApiCallTrigger>(trigger); }
};

/// Fixed robot lines not tied to a dialogue.
struct Phrases {
    std::string clarify = "Sorry, I didn't understand. Could you say that again?";
    std::string give_up = "I'm sorry, I can't follow. Let's try again later.";
    std::string retry_exhausted = "Sorry, I still didn't get that. Let's start over.";
    std::string greeting = "Hi, I'm ready to work on the gearbox with you.";
};

/// Intents, catalogs, dialogues and event rules. Construction validates every
/// cross-reference and throws Error(InvalidScript) listing all problems.
class ConversationScript {
public:
    ConversationScript(std::vector<intent::Catalog> catalogs, std::vector<intent::IntentDef> intents,
                       std::vector<DialogueDef> dialogues, std::vector<backend::EventRule> event_rules = {},
                       Phrases phrases = {});

    static ConversationScript from_json(const nlohmann::json& j);
    static ConversationScript load(const std::filesystem::path& path);

    const intent::Matcher& matcher() const noexcept { return matcher_; }
    const std::vector<DialogueDef>& dialogues() const noexcept { return dialogues_; }
    const std::vector<backend::EventRule>& event_rules() const noexcept { return event_rules_; }
    const Phrases& phrases() const noexcept { return phrases_; }

    const DialogueDef* find_dialogue(std::string_view id) const;
    const DialogueDef* dialogue_for_intent(std::string_view intent_id) const;

    /// Distinct slot names declared across all intents.
    std::size_t distinct_slot_count() const;
    /// Largest retry allowance among dialogues that prompt for slots.
    int max_slot_retries() const;
    bool has_robot_initiated_dialogues() const;
    bool has_required_slots() const;

private:
    intent::Matcher matcher_;
    std::vector<DialogueDef> dialogues_;
    std::vector<backend::EventRule> event_rules_;
    Phrases phrases_;
};

intent::MatchResult match_utterance(const ConversationScript& script, std::string_view text);

/// Replaces each {name} with its value; unknown placeholders stay verbatim.
std::string render_text(std::string_view templ, const SlotMap& values);

}  // namespace coassembly::dialogue
