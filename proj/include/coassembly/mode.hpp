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

#include <optional>
#include <string_view>

namespace coassembly {

/// Communication structure of a run: natural conversation, or the minimal
/// request-response comparator.
enum class Mode { Conversational, Baseline };

std::string_view to_string(Mode mode);

/// Throws Error(UnknownMode) for anything but "conversational"/"baseline".
Mode parse_mode(std::string_view text);

}  // namespace coassembly
