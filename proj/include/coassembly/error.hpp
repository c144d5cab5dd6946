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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coassembly {

enum class Errc {
    InvalidScript,
    InvalidPlan,
    InvalidScenario,
    OutOfTurn,
    ProtocolViolation,
    UnknownDialogue,
    BadEnvelope,
    UnknownMode,
    SessionBusy,
    MalformedTrace,
    ZeroBaseline,
    EmptySample,
    Io,
};

std::string_view errc_name(Errc code);

/// Error raised by every module. Validation failures carry the full list of
/// problems found rather than only the first one.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message);
    Error(Errc code, std::vector<std::string> problems);

    Errc code() const noexcept { return code_; }
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    Errc code_;
    std::vector<std::string> problems_;
};

}  // namespace coassembly
