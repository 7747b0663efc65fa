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

#include "sketchsmoke/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace sks {

void SimParams::validate() const {
  grid.validate();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) fail("rho must be positive");
  if (!std::isfinite(f_e.x) || !std::isfinite(f_e.y)) fail("f_e must be finite");
  if (!(guidance_gain >= 0.0) || !std::isfinite(guidance_gain)) {
    fail("guidance_gain must be non-negative");
  }
  if (!(tol > 0.0)) fail("tol must be positive");
  if (steps < 0) fail("steps must be non-negative");
  if (!(emitter.radius >= 0.0) || !(emitter.rate >= 0.0) ||
      !std::isfinite(emitter.center.x) || !std::isfinite(emitter.center.y)) {
    fail("emitter radius and rate must be non-negative");
  }
}

namespace {

std::string projection_message(const SolveStats& stats) {
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "pressure projection did not converge: residual %.3e after %d iterations",
                stats.final_residual, stats.iterations);
  return buf;
}

}  // namespace

ProjectionError::ProjectionError(SolveStats stats)
    : Error(ErrorCode::kSolver, projection_message(stats)), stats_(std::move(stats)) {}

void emit_density(SimState& state, const SimParams& params) {
  const Emitter& e = params.emitter;
  if (e.rate <= 0.0 || e.radius <= 0.0) return;
  ScalarField& d = state.density;
  const double r2 = e.radius * e.radius;
  for (int j = 0; j < params.grid.ny; ++j) {
    for (int i = 0; i < params.grid.nx; ++i) {
      const Vec2 p = d.site(i, j);
      const double ex = p.x - e.center.x;
      const double ey = p.y - e.center.y;
      if (ex * ex + ey * ey <= r2) d.at(i, j) = std::min(1.0, d.at(i, j) + e.rate * params.dt);
    }
  }
}

void add_forces(SimState& state, const SimParams& params, const MacVelocity* target) {
  MacVelocity& vel = state.vel;
  const Grid& g = vel.grid();
  if (target != nullptr && !(target->grid() == g)) {
    throw Error(ErrorCode::kShape, "guidance target grid does not match simulation grid");
  }
  const double dt = params.dt;
  const bool weighted = params.force_mode == ForceMode::kDensityWeighted;
  auto weight = [&](int ia, int ja, int ib, int jb) {
    if (!weighted) return 1.0;
    return std::clamp(0.5 * (state.density.at(ia, ja) + state.density.at(ib, jb)), 0.0, 1.0);
  };

  if (params.f_e.x != 0.0) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 1; i < g.nx; ++i) vel.u(i, j) += dt * params.f_e.x * weight(i - 1, j, i, j);
    }
  }
  if (params.f_e.y != 0.0) {
    for (int j = 1; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) vel.v(i, j) += dt * params.f_e.y * weight(i, j - 1, i, j);
    }
  }

  if (target != nullptr && params.guidance_gain > 0.0) {
    const double k = dt * params.guidance_gain;
    auto u = vel.u_data();
    auto v = vel.v_data();
    const auto tu = target->u_data();
    const auto tv = target->v_data();
    for (std::size_t n = 0; n < u.size(); ++n) u[n] += k * (tu[n] - u[n]);
    for (std::size_t n = 0; n < v.size(); ++n) v[n] += k * (tv[n] - v[n]);
  }
  vel.zero_boundary_faces();
}

namespace {

// Midpoint backtrace of the characteristic through `pos`; returns the
// displacement in lattice units (cells).
Vec2 backtrace_cells(const MacVelocity& vel, Vec2 pos, double dt) {
  const Vec2 u0 = sample(vel, pos);
  const Vec2 mid{pos.x - 0.5 * dt * u0.x, pos.y - 0.5 * dt * u0.y};
  const Vec2 u1 = sample(vel, mid);
  const double scale = dt / vel.grid().dx;
  return {scale * u1.x, scale * u1.y};
}

}  // namespace

ScalarField advect_scalar(const ScalarField& field, const MacVelocity& vel, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  if (!(field.grid() == vel.grid())) {
    throw Error(ErrorCode::kShape, "advected field and velocity grids differ");
  }
  ScalarField out(field.grid(), field.siting());
  const int sx = field.sites_x();
  const int sy = field.sites_y();
  for (int j = 0; j < sy; ++j) {
    for (int i = 0; i < sx; ++i) {
      const Vec2 d = backtrace_cells(vel, field.site(i, j), dt);
      out.at(i, j) = detail::sample_lattice(field.data(), sx, sy, i - d.x, j - d.y);
    }
  }
  return out;
}

MacVelocity advect_velocity(const MacVelocity& vel, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  const Grid& g = vel.grid();
  MacVelocity out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      const Vec2 d = backtrace_cells(vel, {i * g.dx, (j + 0.5) * g.dx}, dt);
      out.u(i, j) = detail::sample_lattice(vel.u_data(), g.nx + 1, g.ny, i - d.x, j - d.y);
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 d = backtrace_cells(vel, {(i + 0.5) * g.dx, j * g.dx}, dt);
      out.v(i, j) = detail::sample_lattice(vel.v_data(), g.nx, g.ny + 1, i - d.x, j - d.y);
    }
  }
  return out;
}

Projection project(const MacVelocity& vel, const SimParams& params,
                   const ScalarField* warm_start) {
  const Grid& g = vel.grid();
  MacVelocity out = vel;
  out.zero_boundary_faces();

  // lap(q) = (rho / dt) div(u)  <=>  A q = -(rho / dt) div(u).
  ScalarField rhs = divergence(out);
  const double scale = -params.rho / params.dt;
  for (double& x : rhs.data()) x *= scale;

  SolveOptions options;
  options.tol = params.tol;
  auto [pressure, stats] = solve_neumann_cell(rhs, options, warm_start);
  if (!stats.converged) throw ProjectionError(stats);

  const double k = params.dt / (params.rho * g.dx);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) out.u(i, j) -= k * (pressure.at(i, j) - pressure.at(i - 1, j));
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) out.v(i, j) -= k * (pressure.at(i, j) - pressure.at(i, j - 1));
  }
  return {std::move(out), std::move(pressure), std::move(stats)};
}

double cfl_number(const MacVelocity& vel, double dt) {
  double m = 0.0;
  for (double x : vel.u_data()) m = std::max(m, std::abs(x));
  for (double x : vel.v_data()) m = std::max(m, std::abs(x));
  return m * dt / vel.grid().dx;
}

StepReport step(SimState& state, const SimParams& params, const MacVelocity* target) {
  StepReport report;
  emit_density(state, params);
  add_forces(state, params, target);
  report.cfl = cfl_number(state.vel, params.dt);
  MacVelocity advected = advect_velocity(state.vel, params.dt);
  Projection projected = project(advected, params, &state.pressure);
  state.vel = std::move(projected.vel);
  state.pressure = std::move(projected.pressure);
  report.projection = std::move(projected.stats);
  state.density = advect_scalar(state.density, state.vel, params.dt);
  state.time += params.dt;
  state.step_index += 1;
  return report;
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::none_of(known.begin(), known.end(),
                     [&](const char* k) { return item.key() == k; })) {
      throw Error(ErrorCode::kParse, "unknown key '" + item.key() + "' in " + where);
    }
  }
}

}  // namespace

SimParams parse_sim_params(const std::string& json_text) {
  SimParams p;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "simulation config must be an object");
    reject_unknown(j, {"grid", "dt", "rho", "f_e", "force_mode", "guidance_gain", "steps",
                       "emitter", "seed", "tol"},
                   "simulation config");
    if (j.contains("grid")) {
      const json& gj = j.at("grid");
      reject_unknown(gj, {"nx", "ny", "dx"}, "grid");
      p.grid.nx = gj.value("nx", 64);
      p.grid.ny = gj.value("ny", 64);
      p.grid.dx = gj.contains("dx") ? gj.at("dx").get<double>() : 1.0 / p.grid.nx;
    }
    p.dt = j.value("dt", p.dt);
    p.rho = j.value("rho", p.rho);
    if (j.contains("f_e")) {
      const auto fe = j.at("f_e").get<std::vector<double>>();
      if (fe.size() != 2) throw Error(ErrorCode::kParse, "f_e must be [fx, fy]");
      p.f_e = {fe[0], fe[1]};
    }
    if (j.contains("force_mode")) {
      const auto mode = j.at("force_mode").get<std::string>();
      if (mode == "global") {
        p.force_mode = ForceMode::kGlobal;
      } else if (mode == "density") {
        p.force_mode = ForceMode::kDensityWeighted;
      } else {
        throw Error(ErrorCode::kParse, "force_mode must be \"global\" or \"density\"");
      }
    }
    p.guidance_gain = j.value("guidance_gain", p.guidance_gain);
    p.steps = j.value("steps", p.steps);
    p.tol = j.value("tol", p.tol);
    p.seed = j.value("seed", p.seed);
    if (j.contains("emitter")) {
      const json& ej = j.at("emitter");
      reject_unknown(ej, {"x", "y", "r", "rate"}, "emitter");
      p.emitter.center.x = ej.value("x", p.emitter.center.x);
      p.emitter.center.y = ej.value("y", p.emitter.center.y);
      p.emitter.radius = ej.value("r", p.emitter.radius);
      p.emitter.rate = ej.value("rate", p.emitter.rate);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("invalid simulation config: ") + e.what());
  }
  p.validate();
  return p;
}

std::string sim_params_to_json(const SimParams& p) {
  json j;
  j["grid"] = {{"nx", p.grid.nx}, {"ny", p.grid.ny}, {"dx", p.grid.dx}};
  j["dt"] = p.dt;
  j["rho"] = p.rho;
  j["f_e"] = {p.f_e.x, p.f_e.y};
  j["force_mode"] = p.force_mode == ForceMode::kGlobal ? "global" : "density";
  j["guidance_gain"] = p.guidance_gain;
  j["steps"] = p.steps;
  j["tol"] = p.tol;
  j["seed"] = p.seed;
  j["emitter"] = {{"x", p.emitter.center.x},
                  {"y", p.emitter.center.y},
                  {"r", p.emitter.radius},
                  {"rate", p.emitter.rate}};
  return j.dump();
}

}  // namespace sks
