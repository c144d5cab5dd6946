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

#include "coassembly/script.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "coassembly/error.hpp"

namespace coassembly::dialogue {

namespace {

using nlohmann::json;

std::vector<std::string> validate(const intent::Matcher& m, const std::vector<DialogueDef>& dialogues,
                                  const std::vector<backend::EventRule>& rules) {
    auto problems = intent::check_definitions(m.intents(), m.catalogs());

    std::map<std::string, const DialogueDef*> by_id;
    std::map<std::string, int> per_intent;
    for (const auto& d : dialogues) {
        const std::string where = "dialogue '" + d.id + "'";
        if (d.id.empty()) problems.push_back("dialogue with empty id");
        if (!by_id.emplace(d.id, &d).second) problems.push_back("duplicate " + where);
        if (d.max_slot_retries < 1 || d.max_slot_retries > 5)
            problems.push_back(where + " max_slot_retries must be within 1..5");
        if (const auto* ut = std::get_if<UserIntentTrigger>(&d.trigger)) {
            const auto* in = m.find_intent(ut->intent);
            if (in == nullptr) {
                problems.push_back(where + " is triggered by unknown intent '" + ut->intent + "'");
                continue;
            }
            ++per_intent[ut->intent];
            for (const auto& s : in->slots) {
                if (s.required && !d.slot_prompts.contains(s.name))
                    problems.push_back(where + " has no prompt for required slot '" + s.name + "'");
            }
            for (const auto& [slot, text] : d.slot_prompts) {
                if (in->find_slot(slot) == nullptr) problems.push_back(where + " prompts for unknown slot '" + slot + "'");
            }
            if (!d.dispatch && d.reply_template.empty()) problems.push_back(where + " has neither dispatch nor reply");
        } else {
            if (std::get<ApiCallTrigger>(d.trigger).api.empty()) problems.push_back(where + " has an empty api id");
            if (d.dispatch) problems.push_back(where + " is robot-initiated and cannot dispatch");
            if (d.reply_template.empty()) problems.push_back(where + " needs an opening line");
        }
    }
    for (const auto& in : m.intents()) {
        const int n = per_intent[in.id];
        if (n != 1)
            problems.push_back("intent '" + in.id + "' must have exactly one dialogue, found " + std::to_string(n));
    }
    for (const auto& d : dialogues) {
        if (!d.follow_up) continue;
        auto it = by_id.find(*d.follow_up);
        if (it == by_id.end()) problems.push_back("dialogue '" + d.id + "' follows up with unknown '" + *d.follow_up + "'");
        else if (!it->second->robot_initiated())
            problems.push_back("dialogue '" + d.id + "' follow-up '" + *d.follow_up + "' must be robot-initiated");
    }
    // follow_up chains form a functional graph; walk each chain to detect cycles.
    for (const auto& d : dialogues) {
        std::set<std::string> seen{d.id};
        const DialogueDef* cur = &d;
        while (cur->follow_up) {
            auto it = by_id.find(*cur->follow_up);
            if (it == by_id.end()) break;
            if (!seen.insert(it->first).second) {
                problems.push_back("follow-up chain from '" + d.id + "' is cyclic");
                break;
            }
            cur = it->second;
        }
    }
    for (const auto& r : rules) {
        auto it = by_id.find(r.dialogue);
        if (it == by_id.end()) problems.push_back("event rule for '" + r.event + "' opens unknown dialogue '" + r.dialogue + "'");
        else if (!it->second->robot_initiated())
            problems.push_back("event rule for '" + r.event + "' must open a robot-initiated dialogue, not '" + r.dialogue + "'");
        if (r.event.empty()) problems.push_back("event rule with empty event kind");
    }
    return problems;
}

std::map<std::string, std::string> string_map(const json& j, const char* what) {
    std::map<std::string, std::string> out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw Error(Errc::InvalidScript, std::string{what} + " must be an object");
    for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
    return out;
}

}  // namespace

ConversationScript::ConversationScript(std::vector<intent::Catalog> catalogs, std::vector<intent::IntentDef> intents,
                                       std::vector<DialogueDef> dialogues, std::vector<backend::EventRule> event_rules,
                                       Phrases phrases)
    : matcher_(std::move(intents), std::move(catalogs)),
      dialogues_(std::move(dialogues)),
      event_rules_(std::move(event_rules)),
      phrases_(std::move(phrases)) {
    if (auto problems = validate(matcher_, dialogues_, event_rules_); !problems.empty())
        throw Error(Errc::InvalidScript, std::move(problems));
}

ConversationScript ConversationScript::from_json(const json& j) {
    try {
        if (!j.is_object()) throw Error(Errc::InvalidScript, "script must be a JSON object");
        if (j.value("version", 0) != kScriptVersion)
            throw Error(Errc::InvalidScript, "script version must be " + std::to_string(kScriptVersion));

        std::vector<intent::Catalog> catalogs;
        for (const auto& c : j.value("catalogs", json::array())) {
            intent::Catalog cat{c.at("name").get<std::string>(), {}};
            for (const auto& e : c.at("entries")) {
                cat.entries.push_back({e.at("canonical").get<std::string>(),
                                       e.value("synonyms", std::vector<std::string>{})});
            }
            catalogs.push_back(std::move(cat));
        }

        std::vector<intent::IntentDef> intents;
        for (const auto& i : j.at("intents")) {
            intent::IntentDef def;
            def.id = i.at("id").get<std::string>();
            for (const auto& s : i.value("slots", json::array())) {
                intent::SlotSpec spec;
                spec.name = s.at("name").get<std::string>();
                spec.required = s.value("required", true);
                if (s.value("free_text", false)) {
                    spec.kind = intent::SlotKind::FreeText;
                } else {
                    spec.kind = intent::SlotKind::CatalogRef;
                    spec.catalog = s.value("catalog", spec.name);
                }
                def.slots.push_back(std::move(spec));
            }
            for (const auto& u : i.at("utterances")) def.utterances.push_back(intent::UtteranceTemplate::parse(u.get<std::string>()));
            intents.push_back(std::move(def));
        }

        std::vector<DialogueDef> dialogues;
        for (const auto& d : j.at("dialogues")) {
            DialogueDef def;
            def.id = d.at("id").get<std::string>();
            const auto& trig = d.at("trigger");
            if (trig.contains("intent")) def.trigger = UserIntentTrigger{trig.at("intent").get<std::string>()};
            else if (trig.contains("api")) def.trigger = ApiCallTrigger{trig.at("api").get<std::string>()};
            else throw Error(Errc::InvalidScript, "dialogue '" + def.id + "' trigger needs 'intent' or 'api'");
            def.reply_template = d.value("reply", std::string{});
            def.dispatch = d.value("dispatch", false);
            if (d.contains("follow_up") && !d.at("follow_up").is_null()) def.follow_up = d.at("follow_up").get<std::string>();
            def.slot_prompts = string_map(d.value("slot_prompts", json::object()), "slot_prompts");
            def.max_slot_retries = d.value("max_slot_retries", 2);
            def.expects_reply = d.value("expects_reply", true);
            dialogues.push_back(std::move(def));
        }

        std::vector<backend::EventRule> rules;
        for (const auto& r : j.value("event_rules", json::array())) {
            backend::EventRule rule;
            rule.event = r.at("event").get<std::string>();
            rule.where = string_map(r.value("where", json::object()), "where");
            rule.dialogue = r.at("dialogue").get<std::string>();
            rule.payload = string_map(r.value("payload", json::object()), "payload");
            rules.push_back(std::move(rule));
        }

        Phrases phrases;
        if (auto p = j.find("phrases"); p != j.end()) {
            phrases.clarify = p->value("clarify", phrases.clarify);
            phrases.give_up = p->value("give_up", phrases.give_up);
            phrases.retry_exhausted = p->value("retry_exhausted", phrases.retry_exhausted);
            phrases.greeting = p->value("greeting", phrases.greeting);
        }
        return ConversationScript(std::move(catalogs), std::move(intents), std::move(dialogues), std::move(rules),
                                  std::move(phrases));
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidScript, std::string{"malformed script: "} + e.what());
    }
}

ConversationScript ConversationScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open script " + path.string());
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidScript, path.string() + " is not valid JSON");
    return from_json(j);
}

const DialogueDef* ConversationScript::find_dialogue(std::string_view id) const {
    auto it = std::find_if(dialogues_.begin(), dialogues_.end(), [&](const auto& d) { return d.id == id; });
    return it == dialogues_.end() ? nullptr : &*it;
}

const DialogueDef* ConversationScript::dialogue_for_intent(std::string_view intent_id) const {
    auto it = std::find_if(dialogues_.begin(), dialogues_.end(), [&](const auto& d) {
        const auto* t = std::get_if<UserIntentTrigger>(&d.trigger);
        return t != nullptr && t->intent == intent_id;
    });
    return it == dialogues_.end() ? nullptr : &*it;
}

std::size_t ConversationScript::distinct_slot_count() const {
    std::set<std::string> names;
    for (const auto& in : matcher_.intents())
        for (const auto& s : in.slots) names.insert(s.name);
    return names.size();
}

int ConversationScript::max_slot_retries() const {
    int r = 0;
    for (const auto& d : dialogues_)
        if (!d.slot_prompts.empty()) r = std::max(r, d.max_slot_retries);
    return r;
}

bool ConversationScript::has_robot_initiated_dialogues() const {
    return std::any_of(dialogues_.begin(), dialogues_.end(), [](const auto& d) { return d.robot_initiated(); });
}

bool ConversationScript::has_required_slots() const {
    for (const auto& in : matcher_.intents())
        for (const auto& s : in.slots)
            if (s.required) return true;
    return false;
}

intent::MatchResult match_utterance(const ConversationScript& script, std::string_view text) {
    return script.matcher().match(text);
}

std::string render_text(std::string_view templ, const SlotMap& values) {
    std::string out;
    std::size_t i = 0;
    while (i < templ.size()) {
        if (templ[i] == '{') {
            const auto close = templ.find('}', i);
            if (close != std::string_view::npos) {
                const std::string key{templ.substr(i + 1, close - i - 1)};
                if (auto it = values.find(key); it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(templ[i++]);
    }
    return out;
}

}  // namespace coassembly::dialogue
