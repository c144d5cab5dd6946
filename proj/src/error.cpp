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

#include "coassembly/error.hpp"

namespace coassembly {

namespace {

std::string join_problems(Errc code, const std::vector<std::string>& problems) {
    std::string out{errc_name(code)};
    for (const auto& p : problems) {
        out += "\n  ";
        out += p;
    }
    return out;
}

}  // namespace

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidScript: return "InvalidScript";
        case Errc::InvalidPlan: return "InvalidPlan";
        case Errc::InvalidScenario: return "InvalidScenario";
        case Errc::OutOfTurn: return "OutOfTurn";
        case Errc::ProtocolViolation: return "ProtocolViolation";
        case Errc::UnknownDialogue: return "UnknownDialogue";
        case Errc::BadEnvelope: return "BadEnvelope";
        case Errc::UnknownMode: return "UnknownMode";
        case Errc::SessionBusy: return "SessionBusy";
        case Errc::MalformedTrace: return "MalformedTrace";
        case Errc::ZeroBaseline: return "ZeroBaseline";
        case Errc::EmptySample: return "EmptySample";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(Errc code, std::string message)
    : std::runtime_error(std::string{errc_name(code)} + ": " + message), code_(code), problems_{std::move(message)} {}

Error::Error(Errc code, std::vector<std::string> problems)
    : std::runtime_error(join_problems(code, problems)), code_(code), problems_(std::move(problems)) {}

}  // namespace coassembly
