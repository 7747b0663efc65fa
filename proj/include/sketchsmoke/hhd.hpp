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

// Helmholtz-Hodge decomposition of MAC velocities into gradient, curl and
// harmonic parts, and stream-function extraction.

#ifndef SKETCHSMOKE_HHD_HPP_
#define SKETCHSMOKE_HHD_HPP_

#include <utility>

#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/poisson.hpp"

namespace sks {

/// Node-sited vorticity dv/dx - du/dy at interior nodes; wall nodes are 0.
ScalarField vorticity(const MacVelocity& vel);

/// Solves -lap(psi) = vorticity with psi = 0 on the walls.
std::pair<ScalarField, SolveStats> stream_function(const MacVelocity& vel,
                                                   const SolveOptions& options = {});

/// u = dpsi/dy, v = -dpsi/dx on the faces. The result has zero discrete
/// divergence up to rounding, and zero wall flux whenever psi is constant
/// along the boundary.
MacVelocity curl_velocity(const ScalarField& psi);

struct Decomposition {
  ScalarField psi;
  ScalarField grad_potential;
  MacVelocity curl_part;
  MacVelocity grad_part;
  MacVelocity harmonic;  // input - grad_part - curl_part
  double residual_norm = 0.0;  // ||harmonic|| / max(||input||, eps)
  SolveStats psi_stats;
  SolveStats potential_stats;
};

Decomposition decompose(const MacVelocity& vel, const SolveOptions& options = {});

/// Euclidean norm over the concatenated u and v arrays.
double l2_norm(const MacVelocity& vel);
double l2_norm(const ScalarField& field);

}  // namespace sks

#endif  // SKETCHSMOKE_HHD_HPP_
