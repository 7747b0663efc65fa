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
#include <limits>
#include <numbers>

#include "doctest.h"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/hhd.hpp"
#include "test_util.hpp"

using namespace sks;
using sks::testing::random_psi;
using sks::testing::rel_l2;

TEST_CASE("curl of a node field is discretely divergence free") {
  const Grid g = Grid::unit(64, 64);
  for (int trial = 0; trial < 20; ++trial) {
    const MacVelocity v = curl_velocity(random_psi(g));
    // Exact for power-of-two spacing; 1e-12 is the documented bound.
    CHECK(max_abs_divergence(v) <= 1e-12);
    CHECK(v.max_boundary_normal() == 0.0);
  }
}

TEST_CASE("curl stencil by hand") {
  const Grid g{2, 2, 0.5};
  ScalarField psi(g, Siting::kNode);
  psi.at(1, 1) = 1.0;
  const MacVelocity v = curl_velocity(psi);
  CHECK(v.u(1, 0) == 2.0);
  CHECK(v.u(1, 1) == -2.0);
  CHECK(v.v(0, 1) == -2.0);
  CHECK(v.v(1, 1) == 2.0);
  CHECK_THROWS_AS(curl_velocity(ScalarField(g, Siting::kCell)), Error);
}

TEST_CASE("vorticity of rigid rotation") {
  // u = -(y - 1/2), v = x - 1/2 has vorticity 2.
  const Grid g = Grid::unit(16, 16);
  MacVelocity vel(g);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i <= 16; ++i) vel.u(i, j) = -((j + 0.5) * g.dx - 0.5);
  }
  for (int j = 0; j <= 16; ++j) {
    for (int i = 0; i < 16; ++i) vel.v(i, j) = (i + 0.5) * g.dx - 0.5;
  }
  const ScalarField w = vorticity(vel);
  for (int j = 1; j < 16; ++j) {
    for (int i = 1; i < 16; ++i) CHECK(w.at(i, j) == doctest::Approx(2.0));
  }
  for (int i = 0; i <= 16; ++i) {
    CHECK(w.at(i, 0) == 0.0);
    CHECK(w.at(16, i) == 0.0);
  }
}

TEST_CASE("stream function round trip") {
  const Grid g = Grid::unit(64, 64);
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField psi0 = random_psi(g);
    auto [psi, stats] = stream_function(curl_velocity(psi0));
    CHECK(stats.converged);
    CHECK(rel_l2(psi.data(), psi0.data()) <= 1e-6);
  }
}

TEST_CASE("stream function of a smooth field") {
  const Grid g = Grid::unit(64, 64);
  const double pi = std::numbers::pi;
  ScalarField psi0(g, Siting::kNode);
  for (int j = 0; j <= 64; ++j) {
    for (int i = 0; i <= 64; ++i) psi0.at(i, j) = std::sin(pi * i * g.dx) * std::sin(2 * pi * j * g.dx);
  }
  auto [psi, stats] = stream_function(curl_velocity(psi0));
  CHECK(rel_l2(psi.data(), psi0.data()) <= 1e-9);
}

TEST_CASE("decomposition of a curl field: P and H vanish") {
  const Grid g = Grid::unit(64, 64);
  const MacVelocity u = curl_velocity(random_psi(g));
  const Decomposition d = decompose(u);
  CHECK(d.psi_stats.converged);
  CHECK(d.potential_stats.converged);
  CHECK(d.residual_norm <= 1e-6);
  CHECK(l2_norm(d.grad_part) / l2_norm(u) <= 1e-6);
  CHECK(l2_norm(d.grad_potential) <= 1e-6 * l2_norm(u));
}

TEST_CASE("decomposition of a gradient field: psi vanishes") {
  const Grid g = Grid::unit(32, 32);
  const MacVelocity u = gradient(sks::testing::random_scalar(g, Siting::kCell));
  const Decomposition d = decompose(u);
  CHECK(l2_norm(d.curl_part) <= 1e-8 * l2_norm(u));
  CHECK(d.residual_norm <= 1e-6);
}

TEST_CASE("decomposition of a mixed field") {
  const Grid g = Grid::unit(32, 32);
  const MacVelocity c = curl_velocity(random_psi(g));
  const MacVelocity p = gradient(sks::testing::random_scalar(g, Siting::kCell));
  MacVelocity u(g);
  for (std::size_t k = 0; k < u.u_data().size(); ++k) u.u_data()[k] = c.u_data()[k] + p.u_data()[k];
  for (std::size_t k = 0; k < u.v_data().size(); ++k) u.v_data()[k] = c.v_data()[k] + p.v_data()[k];
  const Decomposition d = decompose(u);
  CHECK(rel_l2(d.curl_part.u_data(), c.u_data()) <= 1e-6);
  CHECK(rel_l2(d.grad_part.v_data(), p.v_data()) <= 1e-6);
  CHECK(d.residual_norm <= 1e-6);
}

TEST_CASE("reassembly of the parts reproduces the input") {
  const Grid g = Grid::unit(24, 24);
  const MacVelocity u = sks::testing::random_mac(g);
  const Decomposition d = decompose(u);
  const double eps = std::numeric_limits<double>::epsilon();
  auto check_block = [&](std::span<const double> in, std::span<const double> gp,
                         std::span<const double> cp, std::span<const double> h) {
    for (std::size_t k = 0; k < in.size(); ++k) {
      const double sum = gp[k] + cp[k] + h[k];
      const double bound = 4.0 * eps * (std::abs(gp[k]) + std::abs(cp[k]) + std::abs(in[k]));
      CHECK(std::abs(sum - in[k]) <= bound);
    }
  };
  check_block(u.u_data(), d.grad_part.u_data(), d.curl_part.u_data(), d.harmonic.u_data());
  check_block(u.v_data(), d.grad_part.v_data(), d.curl_part.v_data(), d.harmonic.v_data());
}

TEST_CASE("operators are linear") {
  const Grid g = Grid::unit(16, 16);
  const ScalarField a = random_psi(g);
  const ScalarField b = random_psi(g);
  ScalarField combo(g, Siting::kNode);
  for (std::size_t k = 0; k < combo.size(); ++k) combo.data()[k] = 3.0 * a.data()[k] - b.data()[k];
  const MacVelocity ca = curl_velocity(a), cb = curl_velocity(b), cc = curl_velocity(combo);
  for (std::size_t k = 0; k < cc.u_data().size(); ++k) {
    CHECK(cc.u_data()[k] == doctest::Approx(3.0 * ca.u_data()[k] - cb.u_data()[k]));
  }
  const ScalarField wa = vorticity(ca), wb = vorticity(cb), wc = vorticity(cc);
  for (std::size_t k = 0; k < wc.size(); ++k) {
    CHECK(wc.data()[k] == doctest::Approx(3.0 * wa.data()[k] - wb.data()[k]).epsilon(1e-9));
  }
}

TEST_CASE("zero input") {
  const Decomposition d = decompose(MacVelocity(Grid::unit(8, 8)));
  CHECK(d.residual_norm == 0.0);
  CHECK(l2_norm(d.psi) == 0.0);
}
