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

#include <chrono>
#include <cmath>
#include <cstdint>

namespace coassembly {

/// Virtual simulation time. Integer milliseconds keep interval sums exact.
using SimTime = std::chrono::duration<std::int64_t, std::milli>;

inline SimTime from_seconds(double s) {
    return SimTime{static_cast<std::int64_t>(std::llround(s * 1000.0))};
}

inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) / 1000.0; }

}  // namespace coassembly
