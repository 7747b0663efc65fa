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

#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <iterator>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/hhd.hpp"
#include "test_util.hpp"

using namespace sks;
using sks::testing::uniform;

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(Grid::unit(2, 2).validate());
  CHECK_THROWS_AS((Grid{1, 4, 0.1}.validate()), Error);
  CHECK_THROWS_AS((Grid{4, 1, 0.1}.validate()), Error);
  CHECK_THROWS_AS((Grid{4, 4, 0.0}.validate()), Error);
  CHECK_THROWS_AS((Grid{4, 4, NAN}.validate()), Error);
  const Grid g = Grid::unit(8, 4);
  CHECK(g.dx == doctest::Approx(0.125));
  CHECK(g.width() == doctest::Approx(1.0));
  CHECK(g.height() == doctest::Approx(0.5));
}

TEST_CASE("field sizes follow siting") {
  const Grid g{5, 3, 0.2};
  CHECK(ScalarField(g, Siting::kNode).size() == 6 * 4);
  CHECK(ScalarField(g, Siting::kCell).size() == 5 * 3);
  MacVelocity v(g);
  CHECK(v.u_data().size() == 6 * 3);
  CHECK(v.v_data().size() == 5 * 4);
  CHECK_THROWS_AS(ScalarField(g, Siting::kCell, std::vector<double>(16)), Error);
  CHECK_THROWS_AS(MacVelocity(g, std::vector<double>(18), std::vector<double>(19)), Error);
}

TEST_CASE("site coordinates") {
  const Grid g{4, 4, 0.25};
  ScalarField node(g, Siting::kNode);
  ScalarField cell(g, Siting::kCell);
  CHECK(node.site(3, 1).x == doctest::Approx(0.75));
  CHECK(node.site(3, 1).y == doctest::Approx(0.25));
  CHECK(cell.site(0, 2).x == doctest::Approx(0.125));
  CHECK(cell.site(0, 2).y == doctest::Approx(0.625));
}

TEST_CASE("sampling reproduces constants") {
  const Grid g = Grid::unit(8, 8);
  for (Siting s : {Siting::kNode, Siting::kCell}) {
    ScalarField f(g, s);
    for (double& x : f.data()) x = 3.25;
    for (int k = 0; k < 50; ++k) {
      CHECK(sample(f, {uniform(-0.5, 1.5), uniform(-0.5, 1.5)}) == 3.25);
    }
  }
  MacVelocity v(g);
  for (double& x : v.u_data()) x = -1.5;
  for (double& x : v.v_data()) x = 0.75;
  const Vec2 s = sample(v, {0.31, 0.77});
  CHECK(s.x == -1.5);
  CHECK(s.y == 0.75);
  const Vec2 z = sample(MacVelocity(g), {0.4, 0.4});
  CHECK(z.x == 0.0);
  CHECK(z.y == 0.0);
}

TEST_CASE("bilinear sampling of a linear node field") {
  // f(x, y) = x + 2y at (0.37, 0.61) is 1.59.
  const Grid g = Grid::unit(8, 8);
  ScalarField f(g, Siting::kNode);
  for (int j = 0; j <= 8; ++j) {
    for (int i = 0; i <= 8; ++i) f.at(i, j) = i * g.dx + 2.0 * j * g.dx;
  }
  CHECK(std::abs(sample(f, {0.37, 0.61}) - 1.59) <= 1e-12 * 1.59);
  CHECK(sample(f, f.site(3, 5)) == f.at(3, 5));
}

TEST_CASE("linear fields are exact on every lattice") {
  const Grid g{10, 7, 0.1};
  auto lin = [](Vec2 p) { return 0.3 - 1.7 * p.x + 0.9 * p.y; };
  for (Siting s : {Siting::kNode, Siting::kCell}) {
    ScalarField f(g, s);
    for (int j = 0; j < f.sites_y(); ++j) {
      for (int i = 0; i < f.sites_x(); ++i) f.at(i, j) = lin(f.site(i, j));
    }
    for (int k = 0; k < 200; ++k) {
      // Inside the site rectangle there is no clamping.
      const Vec2 lo = f.site(0, 0);
      const Vec2 hi = f.site(f.sites_x() - 1, f.sites_y() - 1);
      const Vec2 p{uniform(lo.x, hi.x), uniform(lo.y, hi.y)};
      CHECK(std::abs(sample(f, p) - lin(p)) <= 1e-12 * std::max(1.0, std::abs(lin(p))));
    }
  }
}

TEST_CASE("velocity of sin(pi x) sin(pi y) vanishes at the centre") {
  const Grid g = Grid::unit(64, 64);
  ScalarField psi(g, Siting::kNode);
  for (int j = 0; j <= 64; ++j) {
    for (int i = 0; i <= 64; ++i) {
      psi.at(i, j) = std::sin(std::numbers::pi * i * g.dx) * std::sin(std::numbers::pi * j * g.dx);
    }
  }
  const Vec2 v = sample(curl_velocity(psi), {0.5, 0.5});
  CHECK(std::abs(v.x) <= g.dx * g.dx);
  CHECK(std::abs(v.y) <= g.dx * g.dx);
}

TEST_CASE("non-finite positions are rejected") {
  const Grid g = Grid::unit(4, 4);
  ScalarField f(g, Siting::kCell);
  CHECK(message_of([&] { sample(f, {NAN, 0.5}); }) == "invalid position");
  CHECK(message_of([&] { sample(MacVelocity(g), {0.5, INFINITY}); }) == "invalid position");
  CHECK(code_of([&] { sample(f, {0.5, -INFINITY}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("sampling clamps arbitrary finite positions") {
  // Fuzz: any finite position yields a value within the field's range.
  const Grid g{6, 9, 0.3};
  const ScalarField f = sks::testing::random_scalar(g, Siting::kNode);
  const MacVelocity v = sks::testing::random_mac(g, false);
  for (int k = 0; k < 5000; ++k) {
    const double scale = std::pow(10.0, uniform(-3.0, 300.0));
    const Vec2 p{uniform(-1.0, 1.0) * scale, uniform(-1.0, 1.0) * scale};
    const double s = sample(f, p);
    CHECK(std::abs(s) <= 1.0);
    const Vec2 w = sample(v, p);
    CHECK(std::isfinite(w.x));
    CHECK(std::isfinite(w.y));
  }
}

TEST_CASE("divergence and gradient stencils") {
  const Grid g{3, 3, 0.5};
  MacVelocity v(g);
  v.u(1, 1) = 2.0;
  const ScalarField d = divergence(v);
  CHECK(d.at(0, 1) == doctest::Approx(4.0));
  CHECK(d.at(1, 1) == doctest::Approx(-4.0));
  CHECK(max_abs_divergence(v) == doctest::Approx(4.0));

  ScalarField p(g, Siting::kCell);
  p.at(1, 1) = 1.0;
  const MacVelocity gp = gradient(p);
  CHECK(gp.u(1, 1) == doctest::Approx(2.0));
  CHECK(gp.u(2, 1) == doctest::Approx(-2.0));
  CHECK(gp.v(1, 2) == doctest::Approx(-2.0));
  CHECK(gp.u(0, 1) == 0.0);
  CHECK(gp.max_boundary_normal() == 0.0);
}

TEST_CASE("SFLD round trip of zeros") {
  sks::testing::ScratchDir dir("fields");
  const Grid g = Grid::unit(4, 4);
  const std::string path = dir.file("z.sfld");
  write_field(path, ScalarField(g, Siting::kNode));
  const auto bytes = read_bytes(path);
  CHECK(bytes.size() == kSfldHeaderBytes + 25 * 4);
  const AnyField back = read_field(path);
  CHECK(kind_of(back) == FieldKind::kNodeScalar);
  for (double x : std::get<ScalarField>(back).data()) CHECK(x == 0.0);
}

TEST_CASE("SFLD header layout") {
  const Grid g{8, 8, 0.125};
  const auto bytes = encode_field(MacVelocity(g));
  // 4 magic + 4 version + 1 kind + 3 pad + 4 nx + 4 ny + 8 dx, then f32 payload.
  CHECK(bytes.size() == 28 + 4 * (9 * 8 + 8 * 9));
  CHECK(bytes.size() == 604);
  CHECK(std::memcmp(bytes.data(), "SFLD", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 2);
  CHECK(bytes[9] == 0);
  CHECK(bytes[10] == 0);
  CHECK(bytes[11] == 0);
  CHECK(bytes[12] == 8);
  CHECK(bytes[16] == 8);
  double dx = 0.0;
  std::memcpy(&dx, bytes.data() + 20, 8);
  CHECK(dx == 0.125);
}

TEST_CASE("SFLD round trip is bitwise after f32 narrowing") {
  const Grid g{7, 5, 0.0625};
  for (int trial = 0; trial < 20; ++trial) {
    const AnyField fields[] = {narrow_to_f32(sks::testing::random_scalar(g, Siting::kNode)),
                               narrow_to_f32(sks::testing::random_scalar(g, Siting::kCell)),
                               narrow_to_f32(sks::testing::random_mac(g, false))};
    for (const AnyField& f : fields) {
      const AnyField back = decode_field(encode_field(f));
      REQUIRE(kind_of(back) == kind_of(f));
      CHECK(grid_of(back) == grid_of(f));
      CHECK(encode_field(back) == encode_field(f));
      if (const auto* s = std::get_if<ScalarField>(&f)) {
        const auto& b = std::get<ScalarField>(back);
        for (std::size_t k = 0; k < s->size(); ++k) {
          CHECK(std::bit_cast<std::uint64_t>(b.data()[k]) ==
                std::bit_cast<std::uint64_t>(s->data()[k]));
        }
      } else {
        const auto& m = std::get<MacVelocity>(f);
        const auto& b = std::get<MacVelocity>(back);
        CHECK(std::equal(m.u_data().begin(), m.u_data().end(), b.u_data().begin()));
        CHECK(std::equal(m.v_data().begin(), m.v_data().end(), b.v_data().begin()));
      }
    }
  }
}

TEST_CASE("SFLD parse errors name the header field") {
  const Grid g = Grid::unit(4, 4);
  const auto good = encode_field(ScalarField(g, Siting::kCell));
  auto decode_message = [](std::vector<std::uint8_t> b) {
    return message_of([&] { decode_field(b); });
  };
  auto with = [&](std::size_t at, std::uint8_t value) {
    auto b = good;
    b[at] = value;
    return b;
  };
  CHECK(decode_message(with(0, 'X')) == "bad magic");
  CHECK(decode_message(with(4, 2)).rfind("bad version", 0) == 0);
  CHECK(decode_message(with(8, 3)).rfind("bad kind", 0) == 0);
  CHECK(decode_message(with(10, 1)) == "bad padding");
  CHECK(decode_message(with(12, 1)).rfind("bad nx", 0) == 0);
  CHECK(decode_message(with(16, 0)).rfind("bad ny", 0) == 0);
  CHECK(decode_message(with(27, 0xff)) == "bad dx");
  CHECK(decode_message({good.begin(), good.begin() + 10}).rfind("truncated header", 0) == 0);
  auto shorter = good;
  shorter.pop_back();
  CHECK(decode_message(shorter).rfind("bad payload length", 0) == 0);
  // Kind byte says node but the payload has cell length.
  CHECK(decode_message(with(8, 0)).rfind("bad payload length", 0) == 0);
  auto nan_payload = good;
  const float nan = NAN;
  std::memcpy(nan_payload.data() + 28, &nan, 4);
  CHECK(decode_message(nan_payload).rfind("non-finite payload", 0) == 0);
  CHECK(code_of([&] { decode_field(with(0, 'X')); }) == ErrorCode::kParse);
}

TEST_CASE("reading a missing file") {
  const std::string msg = message_of([] { read_field("/nonexistent/missing.sfld"); });
  CHECK(msg.find("file not found") != std::string::npos);
  CHECK(code_of([] { read_field("/nonexistent/missing.sfld"); }) == ErrorCode::kIo);
}

TEST_CASE("boundary face helpers") {
  const Grid g = Grid::unit(6, 6);
  MacVelocity v = sks::testing::random_mac(g, false);
  CHECK(v.max_boundary_normal() > 0.0);
  v.zero_boundary_faces();
  CHECK(v.max_boundary_normal() == 0.0);
  for (int j = 0; j < 6; ++j) {
    CHECK(v.u(0, j) == 0.0);
    CHECK(v.u(6, j) == 0.0);
  }
}
