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

#include "coassembly/intent.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace coassembly::intent {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }
bool is_ascii_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool contains_run(std::span<const std::string> haystack, std::span<const std::string> needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

std::vector<TokenList> entry_phrases(const CatalogEntry& e) {
    std::vector<TokenList> out;
    out.push_back(normalize(e.canonical));
    for (const auto& s : e.synonyms) out.push_back(normalize(s));
    return out;
}

struct Alignment {
    // [begin, end) token span per hole, in template order.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
};

void align(const std::vector<TemplateToken>& pattern, std::size_t pi, std::span<const std::string> text, std::size_t ti,
           Alignment& current, std::vector<Alignment>& out) {
    if (pi == pattern.size()) {
        if (ti == text.size()) out.push_back(current);
        return;
    }
    const auto& tok = pattern[pi];
    if (tok.kind == TemplateToken::Kind::Literal) {
        if (ti < text.size() && text[ti] == tok.text) align(pattern, pi + 1, text, ti + 1, current, out);
        return;
    }
    // A hole absorbs one or more tokens. The following token, if any, is a
    // literal, which bounds the search.
    const bool last = pi + 1 == pattern.size();
    for (std::size_t end = ti + 1; end <= text.size(); ++end) {
        if (last && end != text.size()) continue;
        if (!last && (end >= text.size() || text[end] != pattern[pi + 1].text)) continue;
        current.spans.emplace_back(ti, end);
        align(pattern, pi + 1, text, end, current, out);
        current.spans.pop_back();
    }
}

}  // namespace

TokenList normalize(std::string_view text) {
    TokenList out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_ascii_space(c)) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else if (is_ascii_punct(c)) {
            continue;
        } else if (c < 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string join(std::span<const std::string> tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

const CatalogEntry* Catalog::find(std::string_view canonical) const {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.canonical == canonical; });
    return it == entries.end() ? nullptr : &*it;
}

Resolution resolve_catalog(const Catalog& catalog, std::span<const std::string> phrase) {
    if (phrase.empty()) return NoEntry{};
    std::vector<std::string> hits;
    for (const auto& e : catalog.entries) {
        for (const auto& p : entry_phrases(e)) {
            if (contains_run(p, phrase)) {
                hits.push_back(e.canonical);
                break;
            }
        }
    }
    if (hits.empty()) return NoEntry{};
    if (hits.size() == 1) return Unique{hits.front()};
    return Ambiguous{std::move(hits)};
}

Resolution resolve_answer(const Catalog& catalog, std::span<const std::string> answer) {
    if (answer.empty()) return NoEntry{};
    std::size_t best_len = 0;
    std::vector<std::string> best;
    for (const auto& e : catalog.entries) {
        std::size_t len = 0;
        for (const auto& p : entry_phrases(e)) {
            if (contains_run(answer, p)) len = std::max(len, p.size());
        }
        if (len == 0) continue;
        if (len > best_len) {
            best_len = len;
            best.clear();
        }
        if (len == best_len) best.push_back(e.canonical);
    }
    if (best.size() == 1) return Unique{best.front()};
    if (best.size() > 1) return Ambiguous{std::move(best)};
    return resolve_catalog(catalog, answer);
}

UtteranceTemplate UtteranceTemplate::parse(std::string_view source) {
    UtteranceTemplate t;
    t.source_ = std::string{source};
    std::size_t i = 0;
    while (i < source.size()) {
        while (i < source.size() && is_ascii_space(static_cast<unsigned char>(source[i]))) ++i;
        std::size_t j = i;
        while (j < source.size() && !is_ascii_space(static_cast<unsigned char>(source[j]))) ++j;
        if (j == i) break;
        const auto word = source.substr(i, j - i);
        if (word.size() > 2 && word.front() == '{' && word.back() == '}') {
            t.tokens_.push_back({TemplateToken::Kind::Hole, std::string{word.substr(1, word.size() - 2)}});
        } else {
            for (auto& lit : normalize(word)) t.tokens_.push_back({TemplateToken::Kind::Literal, std::move(lit)});
        }
        i = j;
    }
    return t;
}

int UtteranceTemplate::literal_count() const noexcept {
    return static_cast<int>(std::count_if(tokens_.begin(), tokens_.end(),
                                          [](const auto& t) { return t.kind == TemplateToken::Kind::Literal; }));
}

int UtteranceTemplate::hole_count() const noexcept { return static_cast<int>(tokens_.size()) - literal_count(); }

std::string UtteranceTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    for (const auto& tok : tokens_) {
        if (!out.empty()) out.push_back(' ');
        if (tok.kind == TemplateToken::Kind::Literal) {
            out += tok.text;
        } else if (auto it = values.find(tok.text); it != values.end()) {
            out += it->second;
        } else {
            out += "{" + tok.text + "}";
        }
    }
    return out;
}

const SlotSpec* IntentDef::find_slot(std::string_view name) const {
    auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.name == name; });
    return it == slots.end() ? nullptr : &*it;
}

std::vector<std::string> check_definitions(std::span<const IntentDef> intents, std::span<const Catalog> catalogs) {
    std::vector<std::string> problems;
    std::set<std::string> catalog_names;
    for (const auto& c : catalogs) {
        if (!catalog_names.insert(c.name).second) problems.push_back("duplicate catalog '" + c.name + "'");
        std::set<std::string> seen;
        for (const auto& e : c.entries) {
            if (normalize(e.canonical).empty()) problems.push_back("catalog '" + c.name + "' has an empty canonical value");
            if (!seen.insert(e.canonical).second)
                problems.push_back("catalog '" + c.name + "' repeats canonical '" + e.canonical + "'");
            for (const auto& s : e.synonyms) {
                if (normalize(s).empty())
                    problems.push_back("catalog '" + c.name + "' entry '" + e.canonical + "' has an empty synonym");
            }
        }
    }
    std::set<std::string> intent_ids;
    for (const auto& in : intents) {
        const std::string where = "intent '" + in.id + "'";
        if (in.id.empty()) problems.push_back("intent with empty id");
        if (!intent_ids.insert(in.id).second) problems.push_back("duplicate " + where);
        if (in.utterances.empty()) problems.push_back(where + " has no utterances");
        std::set<std::string> slot_names;
        for (const auto& s : in.slots) {
            if (!slot_names.insert(s.name).second) problems.push_back(where + " repeats slot '" + s.name + "'");
            if (s.kind == SlotKind::CatalogRef && !catalog_names.contains(s.catalog))
                problems.push_back(where + " slot '" + s.name + "' references unknown catalog '" + s.catalog + "'");
        }
        for (const auto& u : in.utterances) {
            const std::string uwhere = where + " utterance \"" + u.source() + "\"";
            if (u.literal_count() == 0) problems.push_back(uwhere + " has no literal token");
            std::set<std::string> holes;
            const auto& toks = u.tokens();
            for (std::size_t i = 0; i < toks.size(); ++i) {
                if (toks[i].kind != TemplateToken::Kind::Hole) continue;
                if (!slot_names.contains(toks[i].text))
                    problems.push_back(uwhere + " uses undeclared slot '" + toks[i].text + "'");
                if (!holes.insert(toks[i].text).second)
                    problems.push_back(uwhere + " uses slot '" + toks[i].text + "' twice");
                if (i + 1 < toks.size() && toks[i + 1].kind == TemplateToken::Kind::Hole)
                    problems.push_back(uwhere + " has adjacent slot holes");
            }
        }
    }
    return problems;
}

Matcher::Matcher(std::vector<IntentDef> intents, std::vector<Catalog> catalogs)
    : intents_(std::move(intents)), catalogs_(std::move(catalogs)) {}

const Catalog* Matcher::find_catalog(std::string_view name) const {
    auto it = std::find_if(catalogs_.begin(), catalogs_.end(), [&](const auto& c) { return c.name == name; });
    return it == catalogs_.end() ? nullptr : &*it;
}

const IntentDef* Matcher::find_intent(std::string_view id) const {
    auto it = std::find_if(intents_.begin(), intents_.end(), [&](const auto& i) { return i.id == id; });
    return it == intents_.end() ? nullptr : &*it;
}

MatchResult Matcher::match(std::string_view text) const {
    const auto tokens = normalize(text);
    return match_tokens(tokens);
}

MatchResult Matcher::match_tokens(std::span<const std::string> tokens) const {
    MatchResult best;
    int best_filled = -1;
    // Ordering key: higher literal score, fewer holes, smaller intent id,
    // then more filled slots. Template declaration order breaks what is left
    // because later candidates only replace on strict improvement.
    auto better = [&](const IntentMatch& m, int filled) {
        if (!best) return true;
        return std::make_tuple(-m.literal_score, m.slot_holes, std::string_view{m.intent}, -filled) <
               std::make_tuple(-best->literal_score, best->slot_holes, std::string_view{best->intent}, -best_filled);
    };

    for (const auto& in : intents_) {
        for (const auto& tmpl : in.utterances) {
            std::vector<Alignment> alignments;
            Alignment cur;
            align(tmpl.tokens(), 0, tokens, 0, cur, alignments);
            if (alignments.empty()) continue;

            std::optional<IntentMatch> tmpl_best;
            int tmpl_best_filled = -1;
            for (const auto& al : alignments) {
                IntentMatch m;
                m.intent = in.id;
                m.literal_score = tmpl.literal_count();
                m.slot_holes = tmpl.hole_count();
                std::size_t hole = 0;
                for (const auto& tok : tmpl.tokens()) {
                    if (tok.kind != TemplateToken::Kind::Hole) continue;
                    const auto [b, e] = al.spans[hole++];
                    const auto span = tokens.subspan(b, e - b);
                    const SlotSpec* slot = in.find_slot(tok.text);
                    if (slot == nullptr) continue;
                    if (slot->kind == SlotKind::FreeText) {
                        m.filled[slot->name] = join(span);
                    } else if (const Catalog* cat = find_catalog(slot->catalog)) {
                        if (auto r = resolve_catalog(*cat, span); auto* u = std::get_if<Unique>(&r))
                            m.filled[slot->name] = u->canonical;
                    }
                }
                for (const auto& s : in.slots) {
                    if (s.required && !m.filled.contains(s.name)) m.missing_required.insert(s.name);
                }
                const int filled = static_cast<int>(m.filled.size());
                if (filled > tmpl_best_filled) {
                    tmpl_best_filled = filled;
                    tmpl_best = std::move(m);
                }
            }
            if (tmpl_best && better(*tmpl_best, tmpl_best_filled)) {
                best = std::move(tmpl_best);
                best_filled = tmpl_best_filled;
            }
        }
    }
    return best;
}

std::optional<std::string> Matcher::resolve_slot_answer(const SlotSpec& slot, std::string_view text) const {
    const auto tokens = normalize(text);
    if (tokens.empty()) return std::nullopt;
    if (slot.kind == SlotKind::FreeText) return join(tokens);
    const Catalog* cat = find_catalog(slot.catalog);
    if (cat == nullptr) return std::nullopt;
    if (auto r = resolve_answer(*cat, tokens); auto* u = std::get_if<Unique>(&r)) return u->canonical;
    return std::nullopt;
}

}  // namespace coassembly::intent
