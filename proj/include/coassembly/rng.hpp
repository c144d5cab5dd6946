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

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include "coassembly/time.hpp"

namespace coassembly {

/// Derives a stream key from (seed, stream name, ordinal). Streams with
/// different names or ordinals are statistically independent.
std::uint64_t derive_stream_key(std::uint64_t seed, std::string_view name, std::uint64_t ordinal);

/// Named pseudo-random stream. Only the engine output is used (the standard
/// distributions are implementation-defined), so draws are identical on every
/// platform.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::string_view name, std::uint64_t ordinal = 0)
        : engine_(derive_stream_key(seed, name, ordinal)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Uniform in [lo, hi], millisecond resolution.
    SimTime uniform(SimTime lo, SimTime hi);

private:
    std::mt19937_64 engine_;
};

}  // namespace coassembly
