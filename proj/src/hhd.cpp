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

#include "sketchsmoke/hhd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sketchsmoke/error.hpp"

namespace sks {

ScalarField vorticity(const MacVelocity& vel) {
  const Grid& g = vel.grid();
  ScalarField omega(g, Siting::kNode);
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      omega.at(i, j) =
          (vel.v(i, j) - vel.v(i - 1, j) - vel.u(i, j) + vel.u(i, j - 1)) / g.dx;
    }
  }
  return omega;
}

std::pair<ScalarField, SolveStats> stream_function(const MacVelocity& vel,
                                                   const SolveOptions& options) {
  return solve_dirichlet_node(vorticity(vel), options);
}

MacVelocity curl_velocity(const ScalarField& psi) {
  if (psi.siting() != Siting::kNode) {
    throw Error(ErrorCode::kShape, "curl expects a node-sited stream function");
  }
  const Grid& g = psi.grid();
  MacVelocity vel(g);
  double peak = 0.0;
  for (double x : psi.data()) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return vel;

  // Snap psi to a fixed-point lattice with 2^49 steps below its peak. Face
  // differences and their divergence sums are then exact in double (for
  // power-of-two dx), so div(curl psi) vanishes identically rather than to
  // rounding. The snap moves psi by at most 2^-49 of its peak.
  const int e = std::ilogb(peak);
  const double to_lattice = std::ldexp(1.0, 48 - e);
  const double from_lattice = std::ldexp(1.0, e - 48);
  std::vector<double> q(psi.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = std::nearbyint(psi.data()[k] * to_lattice);
  const int sx = g.nx + 1;
  auto at = [&](int i, int j) { return q[static_cast<std::size_t>(j) * sx + i]; };

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      vel.u(i, j) = (at(i, j + 1) - at(i, j)) * from_lattice / g.dx;
    }
  }
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      vel.v(i, j) = -((at(i + 1, j) - at(i, j)) * from_lattice) / g.dx;
    }
  }
  return vel;
}

double l2_norm(const MacVelocity& vel) {
  double s = 0.0;
  for (double x : vel.u_data()) s += x * x;
  for (double x : vel.v_data()) s += x * x;
  return std::sqrt(s);
}

double l2_norm(const ScalarField& field) {
  double s = 0.0;
  for (double x : field.data()) s += x * x;
  return std::sqrt(s);
}

Decomposition decompose(const MacVelocity& vel, const SolveOptions& options) {
  const Grid& g = vel.grid();

  // lap(P) = div(U)  <=>  A P = -div(U) with A the negated Laplacian.
  ScalarField rhs = divergence(vel);
  for (double& x : rhs.data()) x = -x;
  auto [potential, potential_stats] = solve_neumann_cell(rhs, options);
  MacVelocity grad_part = gradient(potential);

  auto [psi, psi_stats] = stream_function(vel, options);
  MacVelocity curl_part = curl_velocity(psi);

  MacVelocity harmonic(g);
  auto hu = harmonic.u_data();
  auto hv = harmonic.v_data();
  for (std::size_t k = 0; k < hu.size(); ++k) {
    hu[k] = vel.u_data()[k] - grad_part.u_data()[k] - curl_part.u_data()[k];
  }
  for (std::size_t k = 0; k < hv.size(); ++k) {
    hv[k] = vel.v_data()[k] - grad_part.v_data()[k] - curl_part.v_data()[k];
  }
  const double denom = std::max(l2_norm(vel), std::numeric_limits<double>::min());
  const double residual = l2_norm(harmonic) / denom;

  return Decomposition{std::move(psi),
                       std::move(potential),
                       std::move(curl_part),
                       std::move(grad_part),
                       std::move(harmonic),
                       residual,
                       std::move(psi_stats),
                       std::move(potential_stats)};
}

}  // namespace sks
