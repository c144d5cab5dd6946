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

#include <iosfwd>

#include "coassembly/sim.hpp"

namespace coassembly::cli {

struct ReplOptions {
    /// Map wall-clock time to sim time 1:1 instead of stepping between inputs.
    bool realtime = false;
};

/// Text front-end where a human is the operator's voice. Input lines:
///   <text>          say text now
///   @<secs> <text>  say text at virtual time secs
///   @<secs>         advance to secs
///   :wait (or empty)  advance to the next robot line or speaking cue
///   :run            advance until the scenario ends or nothing is scheduled
///   :status         print the robot status and plan progress
///   :quit
/// After every input the simulation advances to the next robot line or cue.
/// Returns the process exit code.
int run_repl(sim::Simulation& sim, std::istream& in, std::ostream& out, ReplOptions options = {});

}  // namespace coassembly::cli
