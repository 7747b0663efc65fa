// Copyright 2026 The SketchSmoke Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sketchsmoke/service.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/hhd.hpp"
#include "sketchsmoke/image.hpp"
#include "sketchsmoke/sim.hpp"

namespace sks {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Without an explicit gain a session would ignore its own target.
constexpr double kDefaultSessionGain = 5.0;

struct Target {
  ScalarField psi;
  MacVelocity vel;
  json psi_stats;
  json fit_report;
};

struct Session {
  Session(SimParams p, Target t)
      : params(std::move(p)), state(params.grid), target(std::move(t)), published(state.vel) {}

  SimParams params;

  std::mutex run_mutex;  // serializes state-changing requests
  SimState state;

  std::mutex data_mutex;  // guards everything below
  Target target;
  MacVelocity published;  // velocity as of the last completed request
  std::vector<std::string> frames;
  Clock::time_point last_touched = Clock::now();
};

json stats_json(const SolveStats& s) {
  return {{"iterations", s.iterations},
          {"final_residual", s.final_residual},
          {"converged", s.converged}};
}

std::string field_bytes(const AnyField& field) {
  const auto bytes = encode_field(field);
  return std::string(bytes.begin(), bytes.end());
}

std::string frame_png(const ScalarField& density) {
  const auto bytes = encode_png(render_cell_field(density));
  return std::string(bytes.begin(), bytes.end());
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                json extra = json::object()) {
  extra["error"] = message;
  send_json(res, status, extra);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);  // json::parse_error -> 400
  if (!body.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return body;
}

StrokeSet strokes_from(const json& body) {
  if (!body.contains("strokes")) return StrokeSet{};
  const json& s = body.at("strokes");
  // Accept either a full StrokeSet object or a bare list of strokes.
  if (s.is_array()) return parse_strokes_json(json{{"strokes", s}}.dump());
  return parse_strokes_json(s.dump());
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 engine{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(engine()));
  return buf;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)) {}

  ServiceOptions options;
  httplib::Server server;
  std::thread server_thread;
  std::thread sweeper;

  mutable std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopping = false;

  // Stroke fit (or external generators) for a session's grid.
  Target build_target(const StrokeSet& strokes, const SimParams& params) const {
    Target t{ScalarField(params.grid, Siting::kNode), MacVelocity(params.grid), {}, {}};
    if (options.generators.stage1) {
      t.psi = run_stage1(*options.generators.stage1, strokes, params.grid);
      if (options.generators.stage2) {
        t.vel = std::get<MacVelocity>(run_stage2(*options.generators.stage2, t.psi).field);
      } else {
        t.vel = curl_velocity(t.psi);
      }
      t.psi_stats = json{{"external", true}};
      t.fit_report = json{{"external", true}};
      return t;
    }
    FitParams fit;
    fit.grid = params.grid;
    fit.tol = params.tol;
    auto [psi, report] = fit_stream_function(strokes, fit);
    t.psi = std::move(psi);
    t.vel = curl_velocity(t.psi);
    t.psi_stats = stats_json(report.solve);
    t.fit_report = json::parse(report.to_json());
    return t;
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) return nullptr;
    return it->second;
  }

  static void touch(Session& s) {
    std::lock_guard lock(s.data_mutex);
    s.last_touched = Clock::now();
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    SimParams params;
    StrokeSet strokes;
    try {
      const json body = parse_body(req);
      json p = body.value("params", json::object());
      if (!p.is_object()) throw Error(ErrorCode::kParse, "params must be an object");
      if (!p.contains("guidance_gain")) p["guidance_gain"] = kDefaultSessionGain;
      params = parse_sim_params(p.dump());
      strokes = strokes_from(body);
    } catch (const json::exception& e) {
      return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      return send_error(res, 400, e.what());
    }

    Target target{ScalarField(params.grid, Siting::kNode), MacVelocity(params.grid), {}, {}};
    try {
      target = build_target(strokes, params);
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kShape
                             ? 422
                             : 500;
      return send_error(res, status, e.what());
    }

    auto session = std::make_shared<Session>(params, std::move(target));
    emit_density(session->state, session->params);
    session->frames.push_back(frame_png(session->state.density));

    std::string id;
    {
      std::lock_guard lock(sessions_mutex);
      if (static_cast<int>(sessions.size()) >= options.max_sessions) {
        return send_error(res, 503, "session capacity reached");
      }
      do {
        id = new_session_id();
      } while (sessions.count(id) != 0);
      sessions.emplace(id, session);
    }
    send_json(res, 201,
              {{"id", id},
               {"psi_stats", session->target.psi_stats},
               {"fit_report", session->target.fit_report}});
  }

  void run_steps(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    auto session = find(id);
    if (!session) return send_error(res, 404, "unknown session");
    int count = 0;
    try {
      const json body = parse_body(req);
      count = body.value("count", 1);
    } catch (const std::exception& e) {
      return send_error(res, 400, e.what());
    }
    if (count < 0 || count > 100000) return send_error(res, 400, "count must be in [0, 100000]");

    std::unique_lock run(session->run_mutex, std::try_to_lock);
    if (!run.owns_lock()) return send_error(res, 409, "a steps request is already running");
    touch(*session);

    MacVelocity target = [&] {
      std::lock_guard lock(session->data_mutex);
      return session->target.vel;
    }();
    double cfl_max = 0.0;
    int added = 0;
    try {
      for (; added < count; ++added) {
        const StepReport report = step(session->state, session->params, &target);
        cfl_max = std::max(cfl_max, report.cfl);
        std::string png = frame_png(session->state.density);
        std::lock_guard lock(session->data_mutex);
        session->frames.push_back(std::move(png));
      }
    } catch (const ProjectionError& e) {
      std::lock_guard lock(session->data_mutex);
      session->published = session->state.vel;
      return send_error(res, 500, e.what(),
                        {{"frames_added", added}, {"solver", stats_json(e.stats())}});
    } catch (const Error& e) {
      return send_error(res, 500, e.what(), {{"frames_added", added}});
    }
    {
      std::lock_guard lock(session->data_mutex);
      session->published = session->state.vel;
      session->last_touched = Clock::now();
    }
    send_json(res, 200, {{"frames_added", added}, {"cfl_max", cfl_max}});
  }

  void put_strokes(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    auto session = find(id);
    if (!session) return send_error(res, 404, "unknown session");
    StrokeSet strokes;
    try {
      strokes = strokes_from(parse_body(req));
    } catch (const json::exception& e) {
      return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      return send_error(res, 400, e.what());
    }
    std::unique_lock run(session->run_mutex, std::try_to_lock);
    if (!run.owns_lock()) return send_error(res, 409, "a steps request is already running");
    try {
      Target t = build_target(strokes, session->params);
      json report = t.fit_report;
      std::lock_guard lock(session->data_mutex);
      session->target = std::move(t);
      session->last_touched = Clock::now();
      send_json(res, 200, {{"fit_report", report}});
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kShape
                             ? 422
                             : 500;
      send_error(res, status, e.what());
    }
  }

  void get_frame(const std::string& id, const std::string& index, httplib::Response& res) {
    auto session = find(id);
    if (!session) return send_error(res, 404, "unknown session");
    std::lock_guard lock(session->data_mutex);
    session->last_touched = Clock::now();
    std::size_t n = 0;
    try {
      n = std::stoul(index);
    } catch (const std::exception&) {
      return send_error(res, 404, "no such frame");
    }
    if (n >= session->frames.size()) return send_error(res, 404, "no such frame");
    res.status = 200;
    res.set_content(session->frames[n], "image/png");
  }

  void get_field(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    auto session = find(id);
    if (!session) return send_error(res, 404, "unknown session");
    const std::string kind = req.get_param_value("kind");
    std::lock_guard lock(session->data_mutex);
    session->last_touched = Clock::now();
    std::string bytes;
    if (kind == "velocity") {
      bytes = field_bytes(session->published);
    } else if (kind == "psi") {
      bytes = field_bytes(session->target.psi);
    } else if (kind == "target") {
      bytes = field_bytes(session->target.vel);
    } else {
      return send_error(res, 400, "kind must be velocity, psi or target");
    }
    res.status = 200;
    res.set_content(std::move(bytes), "application/octet-stream");
  }

  void delete_session(const std::string& id, httplib::Response& res) {
    std::lock_guard lock(sessions_mutex);
    if (sessions.erase(id) == 0) return send_error(res, 404, "unknown session");
    res.status = 204;
  }

  void sweep() {
    const auto now = Clock::now();
    std::lock_guard lock(sessions_mutex);
    for (auto it = sessions.begin(); it != sessions.end();) {
      // Declared first so the session outlives the lock taken on it.
      const std::shared_ptr<Session> keep = it->second;
      Session& s = *keep;
      std::unique_lock run(s.run_mutex, std::try_to_lock);
      bool idle = false;
      if (run.owns_lock()) {
        std::lock_guard data(s.data_mutex);
        idle = now - s.last_touched > options.idle_timeout;
      }
      it = idle ? sessions.erase(it) : std::next(it);
    }
  }

  void sweeper_loop() {
    const auto period = std::clamp<std::chrono::milliseconds>(
        std::chrono::duration_cast<std::chrono::milliseconds>(options.idle_timeout) / 4,
        std::chrono::milliseconds(50), std::chrono::milliseconds(30000));
    std::unique_lock lock(stop_mutex);
    while (!stop_cv.wait_for(lock, period, [this] { return stopping; })) {
      lock.unlock();
      sweep();
      lock.lock();
    }
  }

  void install_routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      create_session(req, res);
    });
    server.Post(R"(/sessions/([^/]+)/steps)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  run_steps(req.matches[1], req, res);
                });
    server.Put(R"(/sessions/([^/]+)/strokes)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 put_strokes(req.matches[1], req, res);
               });
    server.Get(R"(/sessions/([^/]+)/frames/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 get_frame(req.matches[1], req.matches[2], res);
               });
    server.Get(R"(/sessions/([^/]+)/field)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 get_field(req.matches[1], req, res);
               });
    server.Delete(R"(/sessions/([^/]+))",
                  [this](const httplib::Request& req, httplib::Response& res) {
                    delete_session(req.matches[1], res);
                  });
    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            send_error(res, 500, e.what());
          } catch (...) {
            send_error(res, 500, "unknown error");
          }
        });
  }

  int bind() {
    install_routes();
    int port = options.port;
    if (port == 0) {
      port = server.bind_to_any_port(options.host);
      if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + options.host);
    } else if (!server.bind_to_port(options.host, port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + options.host + ":" + std::to_string(port));
    }
    sweeper = std::thread([this] { sweeper_loop(); });
    return port;
  }

  void shutdown() {
    {
      std::lock_guard lock(stop_mutex);
      stopping = true;
    }
    stop_cv.notify_all();
    server.stop();
    if (server_thread.joinable()) server_thread.join();
    if (sweeper.joinable()) sweeper.join();
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (impl_->options.max_sessions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_sessions must be >= 1");
  }
  if (impl_->options.idle_timeout.count() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "idle timeout must be >= 1 s");
  }
}

Service::~Service() { stop(); }

int Service::start() {
  const int port = impl_->bind();
  impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::run() {
  const int port = impl_->bind();
  std::fprintf(stderr, "serving on http://%s:%d\n", impl_->options.host.c_str(), port);
  impl_->server.listen_after_bind();
  stop();
}

void Service::stop() { impl_->shutdown(); }

int Service::session_count() const {
  std::lock_guard lock(impl_->sessions_mutex);
  return static_cast<int>(impl_->sessions.size());
}

}  // namespace sks
