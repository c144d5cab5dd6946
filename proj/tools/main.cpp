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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "coassembly/error.hpp"
#include "coassembly/metrics.hpp"
#include "coassembly/repl.hpp"
#include "coassembly/scenario.hpp"
#include "coassembly/server.hpp"
#include "coassembly/sim.hpp"

namespace fs = std::filesystem;
using namespace coassembly;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

struct Common {
    std::string scenario;
    std::string plan;
    std::string script;
    std::string mode;
    std::optional<std::uint64_t> seed;
    std::optional<double> max_time;
    std::string out = ".";
};

void add_scenario_flags(CLI::App* cmd, Common& c, bool with_mode) {
    cmd->add_option("--scenario", c.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--plan", c.plan, "Override the scenario's plan")->check(CLI::ExistingFile);
    cmd->add_option("--script", c.script, "Override the scenario's conversational script")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override the scenario seed");
    cmd->add_option("--max-time", c.max_time, "Override the maximum sim time (seconds)");
    if (with_mode)
        cmd->add_option("--mode", c.mode, "conversational or baseline")
            ->check(CLI::IsMember({"conversational", "baseline"}));
}

sim::ScenarioConfig load_config(const Common& c) {
    std::ifstream in(c.scenario);
    if (!in) throw Error(Errc::Io, "cannot open scenario " + c.scenario);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidScenario, c.scenario + " is not valid JSON");
    if (!c.plan.empty()) j["plan"] = fs::absolute(c.plan).string();
    if (!c.script.empty()) j["script"] = fs::absolute(c.script).string();
    if (c.seed) j["seed"] = *c.seed;
    if (c.max_time) j["max_time"] = *c.max_time;
    if (!c.mode.empty()) j["mode"] = c.mode;
    return sim::ScenarioConfig::from_json(j, fs::path(c.scenario).parent_path());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

int cmd_validate(const Common& c, const std::string& plan, const std::string& script) {
    int problems = 0;
    auto report = [&](const std::string& what, const Error& e) {
        std::cerr << what << ": " << errc_name(e.code()) << '\n';
        if (e.problems().empty()) std::cerr << "  " << e.what() << '\n';
        for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
        ++problems;
    };
    if (!plan.empty()) {
        try {
            sim::load_valid_plan(plan);
            std::cout << plan << ": ok\n";
        } catch (const Error& e) {
            report(plan, e);
        }
    }
    if (!script.empty()) {
        try {
            dialogue::ConversationScript::load(script);
            std::cout << script << ": ok\n";
        } catch (const Error& e) {
            report(script, e);
        }
    }
    if (!c.scenario.empty()) {
        try {
            load_config(c);
            std::cout << c.scenario << ": ok\n";
        } catch (const Error& e) {
            report(c.scenario, e);
        }
    }
    return problems == 0 ? kOk : kInvalid;
}

int cmd_run(const Common& c) {
    const auto cfg = load_config(c);
    const auto trace = sim::run_scenario(cfg);
    const auto report = metrics::compute_metrics(trace);
    fs::create_directories(c.out);
    const std::string mode{to_string(cfg.mode)};
    trace.save((fs::path(c.out) / (mode + ".trace.jsonl")).string());
    write_json(fs::path(c.out) / (mode + ".report.json"), report.to_json());
    std::cout << metrics::render_table({{mode, report}});
    std::cout << "end: " << trace.records.back().data.value("reason", "") << '\n';
    return kOk;
}

int cmd_compare(const Common& c) {
    auto cfg = load_config(c);
    fs::create_directories(c.out);
    std::vector<std::pair<std::string, metrics::MetricsReport>> rows;
    metrics::MetricsReport reports[2];
    const Mode modes[2] = {Mode::Baseline, Mode::Conversational};
    for (int i = 0; i < 2; ++i) {
        cfg.mode = modes[i];
        const auto trace = sim::run_scenario(cfg);
        const std::string name{to_string(modes[i])};
        trace.save((fs::path(c.out) / (name + ".trace.jsonl")).string());
        reports[i] = metrics::compute_metrics(trace);
        rows.emplace_back(name, reports[i]);
    }
    const auto cmp = metrics::compare(reports[0], reports[1]);
    auto j = cmp.to_json();
    j["scenario"] = cfg.name;
    j["seed"] = cfg.seed;
    write_json(fs::path(c.out) / "comparison.json", j);
    std::cout << metrics::render_table(rows);
    std::cout << "execution time reduction: " << cmp.execution_time_reduction_pct << "%\n"
              << "robot downtime reduction: " << cmp.downtime_reduction_pct << "%\n";
    return kOk;
}

int cmd_report(const std::vector<std::string>& traces, const std::string& questionnaire, const std::string& out_dir) {
    std::vector<std::pair<std::string, metrics::MetricsReport>> rows;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& path : traces) {
        const auto report = metrics::compute_metrics(sim::Trace::load(path));
        const auto name = fs::path(path).filename().string();
        rows.emplace_back(name, report);
        j["scenarios"][name] = report.to_json();
    }
    if (!questionnaire.empty()) {
        std::ifstream in(questionnaire);
        if (!in) throw Error(Errc::Io, "cannot open " + questionnaire);
        const auto q = metrics::aggregate_questionnaire(metrics::questionnaire_from_json(nlohmann::json::parse(in)));
        j["questionnaire"] = q.to_json();
    }
    std::cout << metrics::render_table(rows);
    if (j.contains("questionnaire")) std::cout << "questionnaire: " << j["questionnaire"].dump() << '\n';
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_json(fs::path(out_dir) / "report.json", j);
        std::ofstream csv(fs::path(out_dir) / "report.csv", std::ios::binary);
        csv << metrics::csv_header() << '\n';
        for (const auto& [name, r] : rows) csv << metrics::csv_row(name, r) << '\n';
    } else {
        std::cout << metrics::csv_header() << '\n';
        for (const auto& [name, r] : rows) std::cout << metrics::csv_row(name, r) << '\n';
    }
    return kOk;
}

int cmd_repl(const Common& c, bool realtime) {
    sim::SimOptions so;
    so.operator_speech = false;
    so.live = true;
    sim::Simulation sim(load_config(c), so);
    cli::ReplOptions ro;
    ro.realtime = realtime;
    return cli::run_repl(sim, std::cin, std::cout, ro);
}

int cmd_serve(const Common& c, int port, const std::string& host, bool stepped) {
    server::ServeOptions so;
    so.port = port;
    so.host = host;
    so.realtime = !stepped;
    server::Service service(load_config(c), so);
    const int bound = service.start();
    std::cout << "listening on http://" << host << ':' << bound << std::endl;
    service.wait();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* lvl = std::getenv("COASSEMBLY_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
    else spdlog::set_level(spdlog::level::warn);

    CLI::App app{"coassembly: conversational human-robot assembly simulator"};
    app.require_subcommand(1);

    Common common;
    std::string v_plan, v_script;
    auto* validate = app.add_subcommand("validate", "Check a plan, script or scenario");
    validate->add_option("--plan", v_plan, "Assembly plan JSON")->check(CLI::ExistingFile);
    validate->add_option("--script", v_script, "Conversation script JSON")->check(CLI::ExistingFile);
    validate->add_option("--scenario", common.scenario, "Scenario JSON")->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "Run one scenario and write its trace and report");
    add_scenario_flags(run, common, true);
    run->add_option("-o,--out", common.out, "Output directory");

    auto* compare = app.add_subcommand("compare", "Run baseline and conversational modes and compare them");
    add_scenario_flags(compare, common, false);
    compare->add_option("-o,--out", common.out, "Output directory");

    bool realtime = false;
    auto* repl = app.add_subcommand("repl", "Be the operator in a live scenario");
    add_scenario_flags(repl, common, true);
    repl->add_flag("--realtime", realtime, "Map wall-clock time to sim time");

    int port = 8080;
    std::string host = "127.0.0.1";
    bool stepped = false;
    auto* serve = app.add_subcommand("serve", "Serve the back-end over HTTP");
    add_scenario_flags(serve, common, true);
    serve->add_option("--port", port, "TCP port (0 picks a free one)");
    serve->add_option("--host", host, "Bind address");
    serve->add_flag("--stepped", stepped, "Advance sim time only on requests");

    std::vector<std::string> traces;
    std::string questionnaire, report_out;
    auto* report = app.add_subcommand("report", "Metrics table, JSON and CSV for trace files");
    report->add_option("traces", traces, "Trace files (.jsonl)")->check(CLI::ExistingFile);
    report->add_option("--questionnaire", questionnaire, "Questionnaire records JSON")->check(CLI::ExistingFile);
    report->add_option("-o,--out", report_out, "Write report.json and report.csv here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*validate) {
            if (v_plan.empty() && v_script.empty() && common.scenario.empty()) {
                std::cerr << "validate: give --plan, --script or --scenario\n";
                return kUsage;
            }
            return cmd_validate(common, v_plan, v_script);
        }
        if (*run) return cmd_run(common);
        if (*compare) return cmd_compare(common);
        if (*repl) return cmd_repl(common, realtime);
        if (*serve) return cmd_serve(common, port, host, stepped);
        if (*report) {
            if (traces.empty() && questionnaire.empty()) {
                std::cerr << "report: give trace files or --questionnaire\n";
                return kUsage;
            }
            return cmd_report(traces, questionnaire, report_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
        for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kUsage;
}
