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

#include <cmath>
#include <functional>
#include <filesystem>
#include <fstream>
#include <variant>

#include "doctest.h"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/hhd.hpp"
#include "sketchsmoke/reconstruct.hpp"
#include "test_util.hpp"

using namespace sks;

namespace {

StrokeSet one_stroke(std::vector<Vec2> points, double speed = 1.0) {
  StrokeSet set;
  set.strokes.push_back({std::move(points), speed});
  return set;
}

FitParams small_fit() {
  FitParams p;
  p.grid = Grid::unit(32, 32);
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string write_script(const sks::testing::ScratchDir& dir, const std::string& name,
                         const std::string& body) {
  const std::string path = dir.file(name);
  std::ofstream(path) << "#!/bin/sh\n" << body << "\n";
  std::filesystem::permissions(path, std::filesystem::perms::owner_all);
  return path;
}

}  // namespace

TEST_CASE("stroke sampling of a straight segment") {
  const auto s = sample_strokes(one_stroke({{0.0, 0.0}, {1.0, 0.0}}), 0.25);
  REQUIRE(s.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(s[k].position.x == doctest::Approx(0.25 * k));
    CHECK(s[k].position.y == 0.0);
    CHECK(s[k].tangent.x == 1.0);
    CHECK(s[k].tangent.y == 0.0);
  }
  CHECK_THROWS_AS(sample_strokes(one_stroke({{0, 0}, {1, 0}}), 0.0), Error);
}

TEST_CASE("stroke sampling blends directions at a bend") {
  const auto s = sample_strokes(one_stroke({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 2.0), 1.0);
  REQUIRE(s.size() == 3);
  CHECK(s[0].tangent.x == 1.0);
  CHECK(s[1].position.x == 1.0);
  CHECK(s[1].tangent.x == doctest::Approx(std::sqrt(0.5)));
  CHECK(s[1].tangent.y == doctest::Approx(std::sqrt(0.5)));
  CHECK(s[2].tangent.y == 1.0);
  for (const auto& x : s) CHECK(x.speed == 2.0);
}

TEST_CASE("a single stroke is reproduced in direction") {
  const StrokeSet set = one_stroke({{0.2, 0.5}, {0.5, 0.55}, {0.8, 0.5}});
  auto [psi, report] = fit_stream_function(set, small_fit());
  CHECK(report.solve.converged);
  CHECK_FALSE(report.no_constraints);
  CHECK(report.samples > 0);
  CHECK(report.median_cosine >= 0.9);
  REQUIRE(report.stroke_mean_cosine.size() == 1);
  CHECK(report.stroke_mean_cosine[0] > 0.5);
  for (int i = 0; i <= 32; ++i) {
    CHECK(psi.at(i, 0) == 0.0);
    CHECK(psi.at(0, i) == 0.0);
  }
}

TEST_CASE("reversing every stroke negates psi") {
  StrokeSet set = one_stroke({{0.2, 0.3}, {0.4, 0.7}, {0.8, 0.6}});
  set.strokes.push_back({{{0.7, 0.2}, {0.3, 0.25}}, 0.5});
  const FitParams params = small_fit();
  auto [fwd, rf] = fit_stream_function(set, params);
  auto [rev, rr] = fit_stream_function(reversed(set), params);
  double scale = 0.0, err = 0.0;
  for (std::size_t k = 0; k < fwd.size(); ++k) {
    scale = std::max(scale, std::abs(fwd.data()[k]));
    err = std::max(err, std::abs(fwd.data()[k] + rev.data()[k]));
  }
  CHECK(scale > 0.0);
  CHECK(err <= 10.0 * params.tol * scale);
  CHECK(rf.median_cosine == doctest::Approx(rr.median_cosine));
}

TEST_CASE("no strokes: zero field flagged as unconstrained") {
  auto [psi, report] = fit_stream_function(StrokeSet{}, small_fit());
  CHECK(report.no_constraints);
  CHECK(l2_norm(psi) == 0.0);
  CHECK(report.to_json().find("\"no_constraints\":true") != std::string::npos);
}

TEST_CASE("degenerate strokes are rejected") {
  const FitParams p = small_fit();
  auto fit = [&](const StrokeSet& s) { return [s, &p] { fit_stream_function(s, p); }; };
  CHECK(code_of(fit(one_stroke({{0.5, 0.5}}))) == ErrorCode::kInvalidArgument);
  CHECK(code_of(fit(one_stroke({{0.5, 0.5}, {0.5, 0.5}}))) == ErrorCode::kInvalidArgument);
  CHECK(code_of(fit(one_stroke({{0.5, 0.5}, {1.5, 0.5}}))) == ErrorCode::kInvalidArgument);
  CHECK(code_of(fit(one_stroke({{0.1, 0.5}, {0.9, 0.5}}, 0.0))) == ErrorCode::kInvalidArgument);
  FitParams bad = p;
  bad.lambda = -1.0;
  CHECK(code_of([&] { fit_stream_function(one_stroke({{0.1, 0.5}, {0.9, 0.5}}), bad); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("stronger regularisation shrinks the fit") {
  const StrokeSet set = one_stroke({{0.2, 0.4}, {0.5, 0.6}, {0.8, 0.4}});
  double previous = INFINITY;
  for (double lambda : {1e-2, 1.0, 1e2}) {
    FitParams p = small_fit();
    p.lambda = lambda;
    auto [psi, report] = fit_stream_function(set, p);
    CHECK(report.solve.converged);
    const double norm = l2_norm(psi);
    CAPTURE(lambda);
    CHECK(norm < previous);
    previous = norm;
  }
}

TEST_CASE("fit scales linearly with stroke speed") {
  const FitParams p = small_fit();
  auto [a, ra] = fit_stream_function(one_stroke({{0.3, 0.3}, {0.7, 0.7}}, 1.0), p);
  auto [b, rb] = fit_stream_function(one_stroke({{0.3, 0.3}, {0.7, 0.7}}, 3.0), p);
  CHECK(sks::testing::max_abs_diff(b.data(), [&] {
          std::vector<double> s(a.data().begin(), a.data().end());
          for (double& x : s) x *= 3.0;
          return s;
        }()) <= 1e-8 * l2_norm(b));
}

TEST_CASE("strokes are rescaled from their own domain") {
  StrokeSet unit = one_stroke({{0.2, 0.5}, {0.8, 0.5}});
  StrokeSet pixels = one_stroke({{51.2, 128.0}, {204.8, 128.0}});
  pixels.domain = {256.0, 256.0};
  auto [a, ra] = fit_stream_function(unit, small_fit());
  auto [b, rb] = fit_stream_function(pixels, small_fit());
  CHECK(sks::testing::max_abs_diff(a.data(), b.data()) <= 1e-8 * l2_norm(a));
}

TEST_CASE("generated fields are checked for kind and dimensions") {
  sks::testing::ScratchDir dir("validate");
  const Grid g = Grid::unit(8, 8);
  const std::string node = dir.file("node.sfld");
  write_field(node, sks::testing::random_psi(g));
  const std::string mac = dir.file("mac.sfld");
  write_field(mac, curl_velocity(sks::testing::random_psi(g)));

  const ValidatedField ok = validate_generated_field(mac, FieldKind::kMac, g);
  // Files hold f32 values, so the diagnostics describe the narrowed field.
  CHECK(ok.diagnostics.max_divergence == max_abs_divergence(std::get<MacVelocity>(ok.field)));
  CHECK(ok.diagnostics.max_boundary_normal == 0.0);
  CHECK(validate_generated_field(node, FieldKind::kNodeScalar, g).diagnostics.max_divergence == 0.0);

  auto kind = [&] { validate_generated_field(node, FieldKind::kMac, g); };
  CHECK(code_of(kind) == ErrorCode::kShape);
  CHECK(message_of(kind).find("kind mismatch") != std::string::npos);
  auto dims = [&] { validate_generated_field(node, FieldKind::kNodeScalar, Grid::unit(8, 4)); };
  CHECK(code_of(dims) == ErrorCode::kShape);
  CHECK(message_of(dims).find("dimension mismatch") != std::string::npos);
  CHECK(code_of([&] { validate_generated_field(dir.file("absent"), FieldKind::kMac, g); }) ==
        ErrorCode::kIo);
}

TEST_CASE("external generator commands") {
  sks::testing::ScratchDir dir("stages");
  const Grid g = Grid::unit(8, 8);
  const ScalarField psi = sks::testing::random_psi(g);
  const std::string prepared = dir.file("prepared.sfld");
  write_field(prepared, psi);

  // Stage 1 must receive the strokes and produce a node field.
  const std::string stage1 = write_script(
      dir, "stage1.sh", "grep -q strokes \"$1\" || exit 3\ncp '" + prepared + "' \"$2\"");
  const ScalarField got = run_stage1(stage1, one_stroke({{0.1, 0.1}, {0.9, 0.9}}), g);
  const ScalarField narrowed = std::get<ScalarField>(narrow_to_f32(psi));
  CHECK(sks::testing::max_abs_diff(got.data(), narrowed.data()) == 0.0);

  // Stage 2 here is a field-producing command written via the library.
  const std::string mac = dir.file("mac.sfld");
  write_field(mac, curl_velocity(psi));
  const std::string stage2 =
      write_script(dir, "stage2.sh", "test -s \"$1\" || exit 3\ncp '" + mac + "' \"$2\"");
  const ValidatedField vel = run_stage2(stage2, psi);
  CHECK(kind_of(vel.field) == FieldKind::kMac);

  // A wrong-kind product and a failing command are both rejected.
  const std::string wrong = write_script(dir, "wrong.sh", "cp '" + prepared + "' \"$2\"");
  CHECK(code_of([&] { run_stage2(wrong, psi); }) == ErrorCode::kShape);
  const std::string failing = write_script(dir, "fail.sh", "exit 1");
  CHECK(code_of([&] { run_stage1(failing, StrokeSet{}, g); }) == ErrorCode::kIo);
}
