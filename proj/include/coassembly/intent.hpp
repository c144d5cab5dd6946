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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace coassembly::intent {

using TokenList = std::vector<std::string>;

/// Lowercases ASCII letters, drops ASCII punctuation and splits on runs of
/// whitespace. Bytes outside ASCII pass through untouched.
TokenList normalize(std::string_view text);

std::string join(std::span<const std::string> tokens);

struct CatalogEntry {
    std::string canonical;
    std::vector<std::string> synonyms;
};

struct Catalog {
    std::string name;
    std::vector<CatalogEntry> entries;

    const CatalogEntry* find(std::string_view canonical) const;
};

struct Unique {
    std::string canonical;
    bool operator==(const Unique&) const = default;
};
struct Ambiguous {
    std::vector<std::string> candidates;  // catalog declaration order
    bool operator==(const Ambiguous&) const = default;
};
struct NoEntry {
    bool operator==(const NoEntry&) const = default;
};
using Resolution = std::variant<Unique, Ambiguous, NoEntry>;

/// Entries whose canonical form or a synonym contains `phrase` as a
/// contiguous token subsequence. `phrase` must be non-empty.
Resolution resolve_catalog(const Catalog& catalog, std::span<const std::string> phrase);

/// Resolution of a free-form answer to a slot prompt ("the sun gear please").
/// Entries whose phrases occur inside the answer win, longest phrase first;
/// otherwise the answer is treated as a fragment via resolve_catalog.
Resolution resolve_answer(const Catalog& catalog, std::span<const std::string> answer);

enum class SlotKind { CatalogRef, FreeText };

struct SlotSpec {
    std::string name;
    SlotKind kind = SlotKind::CatalogRef;
    std::string catalog;  // only for CatalogRef
    bool required = true;
};

struct TemplateToken {
    enum class Kind { Literal, Hole };
    Kind kind;
    std::string text;  // literal token, or slot name for a hole
    bool operator==(const TemplateToken&) const = default;
};

class UtteranceTemplate {
public:
    /// Parses "give me the {tool}". Holes must be whitespace-separated.
    static UtteranceTemplate parse(std::string_view source);

    const std::vector<TemplateToken>& tokens() const noexcept { return tokens_; }
    const std::string& source() const noexcept { return source_; }
    int literal_count() const noexcept;
    int hole_count() const noexcept;

    /// Substitutes slot values; missing holes render as their placeholder.
    std::string render(const std::map<std::string, std::string>& values) const;

private:
    std::string source_;
    std::vector<TemplateToken> tokens_;
};

struct IntentDef {
    std::string id;
    std::vector<UtteranceTemplate> utterances;
    std::vector<SlotSpec> slots;

    const SlotSpec* find_slot(std::string_view name) const;
};

struct IntentMatch {
    std::string intent;
    std::map<std::string, std::string> filled;
    std::set<std::string> missing_required;
    int literal_score = 0;
    int slot_holes = 0;

    bool operator==(const IntentMatch&) const = default;
};

/// Empty optional is NoMatch.
using MatchResult = std::optional<IntentMatch>;

/// Structural problems with intents and catalogs (empty when valid).
std::vector<std::string> check_definitions(std::span<const IntentDef> intents, std::span<const Catalog> catalogs);

/// Compiled, immutable template matcher. Safe to share across threads.
class Matcher {
public:
    Matcher() = default;
    Matcher(std::vector<IntentDef> intents, std::vector<Catalog> catalogs);

    MatchResult match(std::string_view text) const;
    MatchResult match_tokens(std::span<const std::string> tokens) const;

    /// Resolves a slot answer against one slot of one intent.
    std::optional<std::string> resolve_slot_answer(const SlotSpec& slot, std::string_view text) const;

    const std::vector<IntentDef>& intents() const noexcept { return intents_; }
    const std::vector<Catalog>& catalogs() const noexcept { return catalogs_; }
    const Catalog* find_catalog(std::string_view name) const;
    const IntentDef* find_intent(std::string_view id) const;

private:
    std::vector<IntentDef> intents_;
    std::vector<Catalog> catalogs_;
};

}  // namespace coassembly::intent
