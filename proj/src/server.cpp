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

#include "coassembly/server.hpp"

#include <condition_variable>
#include <deque>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "coassembly/error.hpp"
#include "coassembly/protocol.hpp"

namespace coassembly::server {

using nlohmann::json;

namespace {

int http_status(Errc code) {
    switch (code) {
        case Errc::SessionBusy: return 409;
        case Errc::UnknownMode: return 422;
        default: return 400;
    }
}

std::string error_body(const Error& e) {
    return json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump();
}

/// Per-connection buffer between the simulation thread and a stream reader.
struct StreamBuffer {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> lines;
    bool closed = false;

    void push(std::string line) {
        {
            std::lock_guard lock(mutex);
            lines.push_back(std::move(line));
        }
        cv.notify_one();
    }
};

}  // namespace

Service::Service(sim::ScenarioConfig config, ServeOptions options) : options_(std::move(options)) {
    sim::SimOptions so;
    so.operator_speech = false;
    so.live = true;
    so.on_record = [this](const sim::TraceRecord& r) { sim_->backend().stream().publish(r.to_json()); };
    sim_ = std::make_unique<sim::Simulation>(std::move(config), so);
    started_ = std::chrono::steady_clock::now();
}

Service::~Service() { stop(); }

SimTime Service::wall_now() const {
    return std::chrono::duration_cast<SimTime>(std::chrono::steady_clock::now() - started_);
}

void Service::pump() {
    if (options_.realtime) sim_->advance_to(wall_now());
}

std::string Service::handle_skill(const std::string& body, int& status) {
    try {
        const auto env = backend::parse_request(std::string_view{body});
        std::lock_guard lock(sim_mutex_);
        pump();
        if (!options_.realtime && env.context.time) sim_->advance_to(*env.context.time);
        const auto resp = sim_->handle_request(env);
        status = 200;
        return backend::to_json(resp).dump();
    } catch (const Error& e) {
        status = http_status(e.code());
        return error_body(e);
    }
}

std::string Service::handle_events(const std::string& body, int& status) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("event") || !j["event"].is_string()) {
        status = 400;
        return json{{"error", "BadEnvelope"}, {"message", "expected {\"event\": kind, \"fields\": {...}}"}}.dump();
    }
    backend::Event ev;
    ev.kind = j["event"].get<std::string>();
    if (auto f = j.find("fields"); f != j.end()) {
        for (const auto& [k, v] : f->items()) ev.fields[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    std::lock_guard lock(sim_mutex_);
    pump();
    json out = json::array();
    for (const auto& inv : sim_->publish(ev)) out.push_back({{"dialogue", inv.dialogue}, {"payload", inv.payload}});
    status = 200;
    return json{{"invocations", out}}.dump();
}

std::string Service::state() {
    std::lock_guard lock(sim_mutex_);
    pump();
    return sim_->snapshot().dump();
}

std::string Service::metrics() {
    std::lock_guard lock(sim_mutex_);
    pump();
    return sim_->metrics().to_json().dump();
}

int Service::start() {
    http_ = std::make_unique<httplib::Server>();
    auto& srv = *http_;

    srv.Post("/skill", [this](const httplib::Request& req, httplib::Response& res) {
        int status = 200;
        res.set_content(handle_skill(req.body, status), "application/json");
        res.status = status;
    });
    srv.Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
        int status = 200;
        res.set_content(handle_events(req.body, status), "application/json");
        res.status = status;
    });
    srv.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(state(), "application/json");
    });
    srv.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(metrics(), "application/json");
    });
    srv.Get("/trace", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(sim_mutex_);
        res.set_content(sim_->trace().to_jsonl(), "application/x-ndjson");
    });
    srv.Get("/stream", [this](const httplib::Request& req, httplib::Response& res) {
        std::uint64_t from = 0;
        if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
        auto buffer = std::make_shared<StreamBuffer>();
        std::uint64_t sub = 0;
        {
            // Backlog and subscription under the sim lock so no record is missed or doubled.
            std::lock_guard lock(sim_mutex_);
            for (const auto& r : sim_->trace().records)
                if (r.seq >= from) buffer->push(r.to_json().dump() + "\n");
            sub = sim_->backend().stream().subscribe([buffer](const json& record) { buffer->push(record.dump() + "\n"); });
        }
        auto* hub = &sim_->backend().stream();
        res.set_chunked_content_provider(
            "application/x-ndjson",
            [this, buffer](std::size_t, httplib::DataSink& sink) {
                std::unique_lock lock(buffer->mutex);
                buffer->cv.wait_for(lock, std::chrono::milliseconds(200),
                                    [&] { return !buffer->lines.empty() || !running_.load(); });
                if (!running_.load()) {
                    sink.done();
                    return false;
                }
                while (!buffer->lines.empty()) {
                    auto line = std::move(buffer->lines.front());
                    buffer->lines.pop_front();
                    if (!sink.write(line.data(), line.size())) return false;
                }
                return true;
            },
            [hub, sub](bool) { hub->unsubscribe(sub); });
    });

    running_ = true;
    int port = options_.port;
    if (port == 0) {
        port = srv.bind_to_any_port(options_.host);
    } else if (!srv.bind_to_port(options_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        running_ = false;
        throw Error(Errc::Io, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    http_thread_ = std::thread([this] { http_->listen_after_bind(); });
    if (options_.realtime) {
        clock_thread_ = std::thread([this] {
            while (running_.load()) {
                {
                    std::lock_guard lock(sim_mutex_);
                    pump();
                }
                std::this_thread::sleep_for(options_.tick);
            }
        });
    }
    spdlog::info("serving on http://{}:{}", options_.host, port);
    return port;
}

void Service::stop() {
    if (!running_.exchange(false)) return;
    if (http_) http_->stop();
    if (http_thread_.joinable()) http_thread_.join();
    if (clock_thread_.joinable()) clock_thread_.join();
}

void Service::wait() {
    if (http_thread_.joinable()) http_thread_.join();
}

}  // namespace coassembly::server
