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

#include "coassembly/repl.hpp"

#include <chrono>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "coassembly/error.hpp"

namespace coassembly::cli {

namespace {

class Printer {
public:
    Printer(const sim::Simulation& sim, std::ostream& out) : sim_(sim), out_(out) {}

    /// Prints new robot lines; returns how many there were.
    int flush() {
        int robot_lines = 0;
        const auto& records = sim_.trace().records;
        for (; printed_ < records.size(); ++printed_) {
            const auto& r = records[printed_];
            if (r.kind == sim::RecordKind::Utterance && r.data.value("speaker", "") == "robot") {
                out_ << '[' << stamp(r.t) << "] robot: " << r.data.value("text", "") << '\n';
                ++robot_lines;
            } else if (r.kind == sim::RecordKind::SimEnd) {
                out_ << '[' << stamp(r.t) << "] scenario ended (" << r.data.value("reason", "") << ")\n";
            }
        }
        return robot_lines;
    }

    static std::string stamp(SimTime t) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(1) << to_seconds(t);
        return s.str();
    }

private:
    const sim::Simulation& sim_;
    std::ostream& out_;
    std::size_t printed_ = 0;
};

void settle_until_prompt(sim::Simulation& sim, Printer& printer, std::ostream& out) {
    while (!sim.ended() && !sim.cue()) {
        if (!sim.step()) break;
        if (printer.flush() > 0) break;
    }
    printer.flush();
    if (sim.cue()) out << '[' << Printer::stamp(sim.now()) << "] (your turn; the scripted operator would say: \"" << *sim.cue() << "\")\n";
}

}  // namespace

int run_repl(sim::Simulation& sim, std::istream& in, std::ostream& out, ReplOptions options) {
    Printer printer(sim, out);
    const auto wall_start = std::chrono::steady_clock::now();
    auto wall_now = [&] {
        return std::chrono::duration_cast<SimTime>(std::chrono::steady_clock::now() - wall_start);
    };
    out << "Scenario '" << sim.config().name << "' in " << to_string(sim.config().mode)
        << " mode. Type :quit to leave.\n";
    settle_until_prompt(sim, printer, out);

    std::string line;
    while (!sim.ended() && (out << "> " << std::flush, std::getline(in, line))) {
        try {
            if (line == ":quit") break;
            if (line == ":status") {
                const auto snap = sim.snapshot();
                out << '[' << Printer::stamp(sim.now()) << "] " << snap["robot"]["status"].get<std::string>() << '\n';
                for (const auto& s : snap["steps"])
                    out << "  " << s["id"].get<std::string>() << ' ' << s["status"].get<std::string>() << ' '
                        << s["description"].get<std::string>() << '\n';
                continue;
            }
            if (line == ":run") {
                while (sim.step()) printer.flush();
                printer.flush();
                continue;
            }
            if (line.empty() || line == ":wait") {
                if (options.realtime) sim.advance_to(wall_now());
                settle_until_prompt(sim, printer, out);
                continue;
            }
            if (line[0] == '@') {
                const auto space = line.find(' ');
                const double secs = std::stod(line.substr(1, space == std::string::npos ? std::string::npos : space - 1));
                if (space == std::string::npos) {
                    sim.advance_to(from_seconds(secs));
                    printer.flush();
                    settle_until_prompt(sim, printer, out);
                    continue;
                }
                sim.say_at(from_seconds(secs), line.substr(space + 1));
            } else {
                if (options.realtime) sim.advance_to(wall_now());
                sim.say(line);
            }
            printer.flush();
            settle_until_prompt(sim, printer, out);
        } catch (const Error& e) {
            out << "error: " << e.what() << '\n';
        } catch (const std::invalid_argument&) {
            out << "error: bad time in '" << line << "'\n";
        }
    }
    printer.flush();
    return 0;
}

}  // namespace coassembly::cli
