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

#include <benchmark/benchmark.h>

#include <omp.h>

#include "coassembly/scenario.hpp"
#include "coassembly/sim.hpp"

using namespace coassembly;

namespace {

// Both modes of the reference scenario over consecutive seeds.
std::vector<sim::ScenarioConfig> configs(int n) {
    const auto base = sim::ScenarioConfig::load(COASSEMBLY_DATA_DIR "/reference.scenario.json");
    std::vector<sim::ScenarioConfig> out;
    for (int i = 0; i < n; ++i) {
        auto c = base;
        c.seed = base.seed + static_cast<std::uint64_t>(i / 2);
        c.robot.failures.seed = c.seed;
        c.mode = i % 2 == 0 ? Mode::Baseline : Mode::Conversational;
        out.push_back(std::move(c));
    }
    return out;
}

void BM_RunBatchSerial(benchmark::State& state) {
    const auto batch = configs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_batch_serial(batch, 7));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RunBatchOpenMP(benchmark::State& state) {
    const auto batch = configs(static_cast<int>(state.range(0)));
    state.counters["threads"] = omp_get_max_threads();
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_batch(batch, 7));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_RunBatchSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunBatchOpenMP)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
