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

#include <chrono>
#include <future>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/image.hpp"
#include "sketchsmoke/service.hpp"

using nlohmann::json;
using namespace sks;

namespace {

const char* kSession = R"({
  "params": {"grid": {"nx": 32, "ny": 32}, "emitter": {"rate": 5.0}},
  "strokes": {"strokes": [{"points": [[0.2, 0.3], [0.5, 0.6], [0.8, 0.5]]}]}})";

struct Fixture {
  explicit Fixture(ServiceOptions o = {}) : service([&] {
    o.port = 0;
    return o;
  }()) {
    port = service.start();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
  Service service;
  int port = 0;
};

std::string create(httplib::Client& c, const char* body = kSession) {
  auto res = c.Post("/sessions", body, "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  return json::parse(res->body).at("id").get<std::string>();
}

AnyField field(const std::string& body) {
  return decode_field(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()));
}

}  // namespace

TEST_CASE("health and cors") {
  Fixture f;
  auto c = f.client();
  auto res = c.Get("/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == json{{"status", "ok"}});
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  auto pre = c.Options("/sessions");
  REQUIRE(pre);
  CHECK(pre->status == 204);
}

TEST_CASE("session lifecycle") {
  Fixture f;
  auto c = f.client();
  auto res = c.Post("/sessions", kSession, "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  const json created = json::parse(res->body);
  const std::string id = created.at("id");
  CHECK(created.at("psi_stats").at("converged") == true);
  CHECK(created.at("fit_report").at("median_cosine").get<double>() >= 0.9);
  CHECK(f.service.session_count() == 1);

  // Frame 0 exists from creation.
  auto f0 = c.Get("/sessions/" + id + "/frames/0");
  REQUIRE(f0);
  CHECK(f0->status == 200);
  CHECK(f0->get_header_value("Content-Type") == "image/png");
  const GrayImage img =
      decode_png(std::span(reinterpret_cast<const std::uint8_t*>(f0->body.data()), f0->body.size()));
  CHECK(img.width == 32);
  CHECK(img.height == 32);

  auto steps = c.Post("/sessions/" + id + "/steps", R"({"count": 5})", "application/json");
  REQUIRE(steps);
  REQUIRE(steps->status == 200);
  const json sj = json::parse(steps->body);
  CHECK(sj.at("frames_added") == 5);
  CHECK(sj.at("cfl_max").get<double>() > 0.0);
  CHECK(c.Get("/sessions/" + id + "/frames/5")->status == 200);
  CHECK(c.Get("/sessions/" + id + "/frames/6")->status == 404);
  CHECK(c.Get("/sessions/" + id + "/frames/abc")->status == 404);

  auto vel = c.Get("/sessions/" + id + "/field?kind=velocity");
  REQUIRE(vel);
  CHECK(vel->status == 200);
  CHECK(kind_of(field(vel->body)) == FieldKind::kMac);
  CHECK(kind_of(field(c.Get("/sessions/" + id + "/field?kind=psi")->body)) ==
        FieldKind::kNodeScalar);
  CHECK(kind_of(field(c.Get("/sessions/" + id + "/field?kind=target")->body)) == FieldKind::kMac);
  CHECK(c.Get("/sessions/" + id + "/field?kind=pressure")->status == 400);

  auto put = c.Put("/sessions/" + id + "/strokes",
                   R"({"strokes": [{"points": [[0.8, 0.5], [0.2, 0.5]]}]})", "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(json::parse(put->body).contains("fit_report"));

  CHECK(c.Delete("/sessions/" + id)->status == 204);
  CHECK(c.Delete("/sessions/" + id)->status == 404);
  CHECK(c.Get("/sessions/" + id + "/frames/0")->status == 404);
  CHECK(f.service.session_count() == 0);
}

TEST_CASE("request errors") {
  Fixture f;
  auto c = f.client();
  CHECK(c.Post("/sessions", "{not json", "application/json")->status == 400);
  CHECK(c.Post("/sessions", R"({"params": {"dt": -1}})", "application/json")->status == 400);
  CHECK(c.Post("/sessions", R"({"params": {"bogus": 1}})", "application/json")->status == 400);
  CHECK(c.Post("/sessions", R"({"strokes": [{"points": [[0.5, 0.5]]}]})", "application/json")
            ->status == 422);
  CHECK(c.Post("/sessions/nope/steps", "{}", "application/json")->status == 404);
  CHECK(c.Put("/sessions/nope/strokes", "{}", "application/json")->status == 404);
  CHECK(c.Get("/sessions/nope/field?kind=psi")->status == 404);

  const std::string id = create(c);
  CHECK(c.Post("/sessions/" + id + "/steps", R"({"count": -1})", "application/json")->status ==
        400);
  CHECK(c.Post("/sessions/" + id + "/steps", "[1]", "application/json")->status == 400);
  CHECK(c.Put("/sessions/" + id + "/strokes", R"({"strokes": [{"points": [[2, 2], [3, 3]]}]})",
              "application/json")
            ->status == 422);
  // Bare stroke arrays are accepted too.
  CHECK(c.Put("/sessions/" + id + "/strokes", R"({"strokes": [{"points": [[0.1, 0.1], [0.3, 0.3]]}]})",
              "application/json")
            ->status == 200);
}

TEST_CASE("session capacity") {
  ServiceOptions o;
  o.max_sessions = 2;
  Fixture f(o);
  auto c = f.client();
  create(c);
  const std::string second = create(c);
  CHECK(c.Post("/sessions", kSession, "application/json")->status == 503);
  CHECK(c.Delete("/sessions/" + second)->status == 204);
  create(c);
}

TEST_CASE("concurrent steps on one session conflict") {
  Fixture f;
  auto c = f.client();
  const std::string id = create(c, R"({"params": {"grid": {"nx": 48, "ny": 48}}, "strokes": []})");
  auto long_run = std::async(std::launch::async, [&] {
    auto own = f.client();
    return own.Post("/sessions/" + id + "/steps", R"({"count": 300})", "application/json")->status;
  });
  int conflict = 0;
  for (int tries = 0; tries < 200 && conflict == 0; ++tries) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    const int s = c.Post("/sessions/" + id + "/steps", R"({"count": 1})", "application/json")->status;
    if (s == 409) conflict = s;
    const int p = c.Put("/sessions/" + id + "/strokes", "{}", "application/json")->status;
    if (p == 409 && conflict == 0) conflict = p;
  }
  CHECK(conflict == 409);
  CHECK(long_run.get() == 200);
  // Frames stay readable while and after stepping.
  CHECK(c.Get("/sessions/" + id + "/frames/300")->status == 200);
}

TEST_CASE("identical requests produce identical frames") {
  Fixture f;
  auto c = f.client();
  const std::string a = create(c);
  const std::string b = create(c);
  CHECK(a != b);
  for (const auto& id : {a, b}) {
    REQUIRE(c.Post("/sessions/" + id + "/steps", R"({"count": 8})", "application/json")->status ==
            200);
  }
  for (int n = 0; n <= 8; ++n) {
    const std::string path = "/frames/" + std::to_string(n);
    CHECK(c.Get("/sessions/" + a + path)->body == c.Get("/sessions/" + b + path)->body);
  }
  CHECK(c.Get("/sessions/" + a + "/field?kind=velocity")->body ==
        c.Get("/sessions/" + b + "/field?kind=velocity")->body);
}

TEST_CASE("idle sessions are swept") {
  ServiceOptions o;
  o.idle_timeout = std::chrono::seconds(1);
  Fixture f(o);
  auto c = f.client();
  const std::string id = create(c);
  CHECK(f.service.session_count() == 1);
  std::this_thread::sleep_for(std::chrono::milliseconds(1600));
  CHECK(f.service.session_count() == 0);
  CHECK(c.Get("/sessions/" + id + "/frames/0")->status == 404);
}
