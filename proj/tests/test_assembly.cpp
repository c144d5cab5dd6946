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

#include "doctest.h"

#include <algorithm>
#include <functional>

#include "coassembly/assembly.hpp"
#include "coassembly/error.hpp"
#include "kit/testkit.hpp"

using namespace coassembly;
using namespace coassembly::assembly;

namespace {

Step step(std::string id, double secs = 1.0, std::vector<std::string> needs = {}, Actor actor = Actor::Human) {
    Step s;
    s.id = std::move(id);
    s.actor = actor;
    s.needs = std::move(needs);
    s.nominal_duration = from_seconds(secs);
    return s;
}

AssemblyPlan chain_plan(int n, const std::vector<std::pair<int, int>>& edges) {
    AssemblyPlan p;
    p.id = "generated";
    for (int i = 0; i < n; ++i) p.steps.push_back(step("s" + std::to_string(i)));
    for (auto [a, b] : edges) p.precedence.emplace_back("s" + std::to_string(a), "s" + std::to_string(b));
    return p;
}

AssemblyPlan diamond() { return chain_plan(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}); }

std::vector<PlanErrc> codes(const AssemblyPlan& p) {
    std::vector<PlanErrc> out;
    for (const auto& e : validate_plan(p)) out.push_back(e.code);
    return out;
}

bool has(const std::vector<PlanErrc>& v, PlanErrc c) { return std::find(v.begin(), v.end(), c) != v.end(); }

AssemblyPlan gearbox() { return AssemblyPlan::load(testkit::data_path("gearbox.plan.json")); }

}  // namespace

TEST_CASE("validate_plan collects every problem") {
    CHECK(codes(chain_plan(2, {{0, 1}, {1, 0}})) == std::vector<PlanErrc>{PlanErrc::CyclicPrecedence});
    CHECK(codes(chain_plan(1, {{0, 0}})) == std::vector<PlanErrc>{PlanErrc::CyclicPrecedence});

    AssemblyPlan p = chain_plan(2, {{0, 1}, {1, 0}});
    p.steps[0].needs = {"wrench"};
    p.steps[1].nominal_duration = SimTime{0};
    p.steps.push_back(step("s0"));
    p.precedence.emplace_back("s0", "ghost");
    p.items = {{"bolt", ItemKind::Component, "bolt", Location::Storage},
               {"bolt", ItemKind::Component, "bolt", Location::Storage}};
    const auto c = codes(p);
    CHECK(has(c, PlanErrc::CyclicPrecedence));
    CHECK(has(c, PlanErrc::UnknownItem));
    CHECK(has(c, PlanErrc::NonpositiveDuration));
    CHECK(has(c, PlanErrc::DuplicateStep));
    CHECK(has(c, PlanErrc::UnknownStep));
    CHECK(has(c, PlanErrc::DuplicateItem));

    const auto errs = validate_plan(chain_plan(1, {}));
    CHECK(errs.empty());
    AssemblyPlan w = chain_plan(1, {});
    w.steps[0].needs = {"wrench"};
    const auto we = validate_plan(w);
    REQUIRE(we.size() == 1);
    CHECK(we[0].message.find("wrench") != std::string::npos);
}

TEST_CASE("the gearbox fixture is a valid 12-step plan") {
    const auto p = gearbox();
    CHECK(validate_plan(p).empty());
    CHECK(p.steps.size() == 12);
    CHECK(p.items.size() == 12);
    CHECK(std::count_if(p.items.begin(), p.items.end(), [](const Item& i) { return i.kind == ItemKind::Tool; }) == 3);
    CHECK(p.find_step("s04")->actor == Actor::Joint);
    CHECK(p.find_item("carrier")->label == "planet carrier");
    CHECK(p.predecessors("s07") == std::vector<std::string>{"s05", "s06"});
    CHECK(AssemblyPlan::from_json(p.to_json()).to_json() == p.to_json());
}

TEST_CASE("malformed plan documents") {
    auto j = gearbox().to_json();
    j["version"] = 2;
    CHECK_THROWS_AS(AssemblyPlan::from_json(j), Error);
    j = gearbox().to_json();
    j["steps"][0]["actor"] = "alien";
    CHECK_THROWS_AS(AssemblyPlan::from_json(j), Error);
    j = gearbox().to_json();
    j["steps"][0].erase("duration");
    CHECK_THROWS_AS(AssemblyPlan::from_json(j), Error);
}

TEST_CASE("ready_steps examples") {
    SUBCASE("empty plan") {
        AssemblyPlan p;
        CHECK(ready_steps(p, ProgressState::initial(p)).empty());
    }
    SUBCASE("roots are ready initially") {
        const auto p = gearbox();
        CHECK(ready_steps(p, ProgressState::initial(p)) == std::set<std::string>{"s01"});
    }
    SUBCASE("diamond with a done") {
        const auto p = diamond();
        auto prog = ProgressState::initial(p);
        prog.status["s0"] = StepStatus::Done;
        CHECK(ready_steps(p, prog) == std::set<std::string>{"s1", "s2"});
        prog.status["s1"] = StepStatus::Done;
        CHECK(ready_steps(p, prog) == std::set<std::string>{"s2"});
        prog.status["s2"] = StepStatus::Done;
        CHECK(ready_steps(p, prog) == std::set<std::string>{"s3"});
    }
}

TEST_CASE("diamond ready_steps over every status assignment") {
    const auto p = diamond();
    const std::vector<StepStatus> all{StepStatus::Pending, StepStatus::Ready, StepStatus::Active, StepStatus::Done,
                                      StepStatus::Failed};
    const std::vector<std::vector<int>> preds{{}, {0}, {0}, {1, 2}};
    std::size_t n = 0;
    for (int code = 0; code < 625; ++code) {
        ProgressState prog = ProgressState::initial(p);
        std::vector<StepStatus> st(4);
        for (int i = 0, c = code; i < 4; ++i, c /= 5) {
            st[i] = all[c % 5];
            prog.status["s" + std::to_string(i)] = st[i];
        }
        std::set<std::string> expected;
        for (int i = 0; i < 4; ++i) {
            const bool waiting = st[i] == StepStatus::Pending || st[i] == StepStatus::Ready;
            const bool preds_done =
                std::all_of(preds[i].begin(), preds[i].end(), [&](int q) { return st[q] == StepStatus::Done; });
            if (waiting && preds_done) expected.insert("s" + std::to_string(i));
        }
        CAPTURE(code);
        CHECK(ready_steps(p, prog) == expected);
        ++n;
    }
    CHECK(n == 625);
}

TEST_CASE("ready_steps is monotone under completion") {
    const auto p = gearbox();
    RandomStream rng(5, "monotone");
    for (int trial = 0; trial < 200; ++trial) {
        auto prog = ProgressState::initial(p);
        while (!prog.all_done()) {
            const auto before = ready_steps(p, prog);
            REQUIRE_FALSE(before.empty());
            std::vector<std::string> r(before.begin(), before.end());
            const auto pick = r[rng.below(r.size())];
            prog.status[pick] = StepStatus::Done;
            const auto after = ready_steps(p, prog);
            for (const auto& s : before)
                if (s != pick) CHECK(after.contains(s));
        }
    }
}

TEST_CASE("items_available") {
    auto p = gearbox();
    auto prog = ProgressState::initial(p);
    const auto& s05 = *p.find_step("s05");
    CHECK_FALSE(items_available(p, prog, s05));
    prog.item_location["fasteners"] = Location::SharedBench;
    CHECK_FALSE(items_available(p, prog, s05));
    prog.item_location["screwdriver"] = Location::HumanHand;
    CHECK(items_available(p, prog, s05));
    prog.item_location["screwdriver"] = Location::RobotGripper;
    CHECK_FALSE(items_available(p, prog, s05));
    CHECK(items_available(p, prog, *p.find_step("s12")));
}

TEST_CASE("topological_order and critical_path") {
    const auto p = gearbox();
    const auto order = topological_order(p);
    REQUIRE(order.size() == 12);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& [a, b] : p.precedence) CHECK(pos[a] < pos[b]);
    CHECK(order.front() == "s01");
    // Ties go to declaration order.
    CHECK(pos["s02"] < pos["s03"]);

    // Summed by hand along s01 s02 s04 s05 s07 s08 s09 s10 s11 s12.
    CHECK(critical_path(p) == from_seconds(202));
    CHECK(critical_path(AssemblyPlan{}) == SimTime{0});
}

TEST_CASE("critical_path matches path enumeration on random DAGs") {
    RandomStream rng(11, "critical");
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(8));
        std::vector<std::pair<int, int>> edges;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng.uniform01() < 0.3) edges.emplace_back(a, b);
        auto p = chain_plan(n, edges);
        std::vector<double> secs(n);
        for (int i = 0; i < n; ++i) {
            secs[i] = static_cast<double>(1 + rng.below(30));
            p.steps[i].nominal_duration = from_seconds(secs[i]);
        }
        // Every path from every node, by plain recursion.
        std::function<double(int)> longest_from = [&](int a) {
            double best = 0;
            for (auto [x, y] : edges)
                if (x == a) best = std::max(best, longest_from(y));
            return secs[a] + best;
        };
        double expected = 0;
        for (int i = 0; i < n; ++i) expected = std::max(expected, longest_from(i));
        CHECK(critical_path(p) == from_seconds(expected));
    }
}

TEST_CASE("no deadlock on every plan with up to 4 steps") {
    const auto r = testkit::deadlock_oracle(4);
    for (const auto& f : r.failures) FAIL_CHECK(f);
    // Labelled DAG counts 1, 3, 25, 543.
    CHECK(r.acyclic == 1 + 3 + 25 + 543);
}

TEST_CASE("no deadlock on sampled plans with 6 to 8 steps") {
    RandomStream rng(3, "deadlock-sample");
    std::size_t acyclic = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 6 + static_cast<int>(rng.below(3));
        std::vector<std::pair<int, int>> edges;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b && rng.uniform01() < 0.12) edges.emplace_back(a, b);
        const auto p = chain_plan(n, edges);
        // Cycle oracle: repeatedly strip nodes without incoming edges.
        std::vector<bool> gone(n, false);
        for (bool changed = true; changed;) {
            changed = false;
            for (int v = 0; v < n; ++v) {
                if (gone[v]) continue;
                const bool free = std::none_of(edges.begin(), edges.end(),
                                               [&](auto e) { return e.second == v && !gone[e.first]; });
                if (free) gone[v] = changed = true;
            }
        }
        const bool cyclic = std::count(gone.begin(), gone.end(), false) > 0;
        CHECK(has(codes(p), PlanErrc::CyclicPrecedence) == cyclic);
        if (cyclic) continue;
        ++acyclic;
        // Every reachable done-set has a ready step unless all are done.
        std::vector<bool> seen(1u << n, false);
        std::vector<unsigned> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const unsigned mask = stack.back();
            stack.pop_back();
            auto prog = ProgressState::initial(p);
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) prog.status["s" + std::to_string(i)] = StepStatus::Done;
            const auto ready = ready_steps(p, prog);
            if (mask != (1u << n) - 1) REQUIRE_FALSE(ready.empty());
            for (const auto& id : ready) {
                const unsigned next = mask | (1u << std::stoi(id.substr(1)));
                if (!seen[next]) {
                    seen[next] = true;
                    stack.push_back(next);
                }
            }
        }
        CHECK(seen[(1u << n) - 1]);
    }
    CHECK(acyclic > 50);
}
