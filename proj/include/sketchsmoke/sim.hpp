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

// Inviscid incompressible smoke on a MAC grid: semi-Lagrangian advection,
// constant external force, optional guidance toward a target velocity and
// pressure projection with no-flux walls.
//
// One step runs: emit density -> add_forces -> advect_velocity -> project ->
// advect_scalar(density).

#ifndef SKETCHSMOKE_SIM_HPP_
#define SKETCHSMOKE_SIM_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "sketchsmoke/error.hpp"
#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/poisson.hpp"

namespace sks {

enum class ForceMode { kGlobal, kDensityWeighted };

struct Emitter {
  Vec2 center{0.5, 0.2};
  double radius = 0.08;
  double rate = 1.0;  // density added per unit time inside the disc
};

struct SimParams {
  Grid grid = Grid::unit(64, 64);
  double dt = 0.01;
  double rho = 1.0;
  Vec2 f_e{0.0, 1.0};
  ForceMode force_mode = ForceMode::kDensityWeighted;
  double guidance_gain = 0.0;
  double tol = 1e-10;
  int steps = 100;
  Emitter emitter;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument) on dt <= 0, rho <= 0, gain < 0, ...
  void validate() const;
};

struct SimState {
  MacVelocity vel;
  ScalarField density;
  ScalarField pressure;
  double time = 0.0;
  int step_index = 0;

  explicit SimState(const Grid& grid)
      : vel(grid), density(grid, Siting::kCell), pressure(grid, Siting::kCell) {}
};

struct StepReport {
  double cfl = 0.0;  // max|u| * dt / dx before advection
  SolveStats projection;
};

// Thrown by project/step when the pressure solve fails to converge.
class ProjectionError : public Error {
 public:
  explicit ProjectionError(SolveStats stats);
  const SolveStats& stats() const { return stats_; }

 private:
  SolveStats stats_;
};

void emit_density(SimState& state, const SimParams& params);

void add_forces(SimState& state, const SimParams& params, const MacVelocity* target);

ScalarField advect_scalar(const ScalarField& field, const MacVelocity& vel, double dt);
MacVelocity advect_velocity(const MacVelocity& vel, double dt);

struct Projection {
  MacVelocity vel;
  ScalarField pressure;
  SolveStats stats;
};

/// Removes the gradient part of `vel`. `warm_start`, when given, seeds the
/// pressure solve. Throws ProjectionError if the solve does not converge.
Projection project(const MacVelocity& vel, const SimParams& params,
                   const ScalarField* warm_start = nullptr);

StepReport step(SimState& state, const SimParams& params, const MacVelocity* target = nullptr);

/// max over faces of |u| * dt / dx.
double cfl_number(const MacVelocity& vel, double dt);

/// Parses the simulation config JSON (see README for the schema).
SimParams parse_sim_params(const std::string& json_text);
std::string sim_params_to_json(const SimParams& params);

}  // namespace sks

#endif  // SKETCHSMOKE_SIM_HPP_
