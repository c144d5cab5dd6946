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

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "coassembly/sim.hpp"

namespace httplib {
class Server;
}

namespace coassembly::server {

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Sim clock follows the wall clock (1:1). Off: time moves only when a
    /// /skill request carries a later context.t.
    bool realtime = true;
    std::chrono::milliseconds tick{50};
};

/// HTTP front of a live simulation:
///   POST /skill    RequestEnvelope -> ResponseEnvelope
///   POST /events   {"event": kind, "fields": {...}} -> invocations
///   GET  /state    snapshot of sim, robot, plan and session
///   GET  /metrics  MetricsReport so far
///   GET  /stream   trace records as newline-delimited JSON (?from=<seq>)
///   GET  /trace    the whole trace so far as newline-delimited JSON
class Service {
public:
    Service(sim::ScenarioConfig config, ServeOptions options);
    ~Service();

    /// Binds and serves on a background thread. Returns the bound port.
    int start();
    void stop();
    /// Blocks until stop().
    void wait();

    std::string handle_skill(const std::string& body, int& status);
    std::string handle_events(const std::string& body, int& status);
    std::string state();
    std::string metrics();

private:
    void pump();
    SimTime wall_now() const;

    ServeOptions options_;
    std::mutex sim_mutex_;
    std::unique_ptr<sim::Simulation> sim_;
    std::unique_ptr<httplib::Server> http_;
    std::thread http_thread_;
    std::thread clock_thread_;
    std::atomic<bool> running_{false};
    std::chrono::steady_clock::time_point started_;
};

}  // namespace coassembly::server
