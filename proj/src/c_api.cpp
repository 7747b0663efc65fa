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

#include "sketchsmoke/sketchsmoke.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "sketchsmoke/dataset.hpp"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/hhd.hpp"
#include "sketchsmoke/image.hpp"
#include "sketchsmoke/reconstruct.hpp"
#include "sketchsmoke/service.hpp"
#include "sketchsmoke/sim.hpp"
#include "sketchsmoke/streamline.hpp"

struct sks_field {
  sks::AnyField value;
};

struct sks_strokes {
  sks::StrokeSet value;
};

struct sks_sim {
  sks::SimParams params;
  sks::SimState state;
  std::optional<sks::MacVelocity> target;
};

namespace {

thread_local std::string last_error;

sks_status fail(sks_status status, const char* message) {
  last_error = message;
  return status;
}

template <typename Fn>
sks_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return SKS_OK;
  } catch (const sks::Error& e) {
    return fail(static_cast<sks_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SKS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SKS_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw sks::Error(sks::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const sks::MacVelocity& as_mac(const sks_field* f) {
  const auto* m = std::get_if<sks::MacVelocity>(&f->value);
  if (m == nullptr) throw sks::Error(sks::ErrorCode::kShape, "expected a MAC velocity field");
  return *m;
}

const sks::ScalarField& as_node(const sks_field* f) {
  const auto* s = std::get_if<sks::ScalarField>(&f->value);
  if (s == nullptr || s->siting() != sks::Siting::kNode) {
    throw sks::Error(sks::ErrorCode::kShape, "expected a node scalar field");
  }
  return *s;
}

sks_solve_stats to_c(const sks::SolveStats& s) {
  return {s.iterations, s.final_residual, s.converged ? 1 : 0};
}

sks::SolveOptions options_for(double tol) {
  sks::SolveOptions o;
  if (tol > 0.0) o.tol = tol;
  return o;
}

}  // namespace

extern "C" {

SKS_API uint32_t sks_abi_version(void) { return SKS_ABI_VERSION; }

SKS_API const char* sks_last_error(void) { return last_error.c_str(); }

SKS_API void sks_string_free(char* s) { std::free(s); }

SKS_API sks_status sks_field_read(const char* path, sks_field** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new sks_field{sks::read_field(path)};
  });
}

SKS_API sks_status sks_field_write(const sks_field* field, const char* path) {
  return guarded([&] {
    require(field != nullptr && path != nullptr, "null argument");
    sks::write_field(path, field->value);
  });
}

SKS_API sks_status sks_field_info_get(const sks_field* field, sks_field_info* out) {
  return guarded([&] {
    require(field != nullptr && out != nullptr, "null argument");
    const sks::Grid& g = sks::grid_of(field->value);
    *out = {static_cast<sks_field_kind>(sks::kind_of(field->value)), g.nx, g.ny, g.dx};
  });
}

SKS_API void sks_field_destroy(sks_field* field) { delete field; }

SKS_API sks_status sks_stream_function(const sks_field* velocity, double tol, sks_field** psi_out,
                                       sks_solve_stats* stats) {
  return guarded([&] {
    require(velocity != nullptr && psi_out != nullptr, "null argument");
    auto [psi, s] = sks::stream_function(as_mac(velocity), options_for(tol));
    if (stats != nullptr) *stats = to_c(s);
    *psi_out = new sks_field{std::move(psi)};
  });
}

SKS_API sks_status sks_decompose(const sks_field* velocity, double tol, sks_field** psi_out,
                                 sks_field** harmonic_out, sks_hhd_result* result) {
  return guarded([&] {
    require(velocity != nullptr, "null argument");
    const sks::MacVelocity& u = as_mac(velocity);
    sks::Decomposition d = sks::decompose(u, options_for(tol));
    if (result != nullptr) {
      const double un = sks::l2_norm(u);
      result->residual_norm = d.residual_norm;
      result->potential_norm_ratio = un > 0.0 ? sks::l2_norm(d.grad_part) / un : 0.0;
      result->psi_stats = to_c(d.psi_stats);
      result->potential_stats = to_c(d.potential_stats);
    }
    if (psi_out != nullptr) *psi_out = new sks_field{std::move(d.psi)};
    if (harmonic_out != nullptr) *harmonic_out = new sks_field{std::move(d.harmonic)};
  });
}

SKS_API sks_status sks_curl(const sks_field* psi, sks_field** velocity_out) {
  return guarded([&] {
    require(psi != nullptr && velocity_out != nullptr, "null argument");
    *velocity_out = new sks_field{sks::curl_velocity(as_node(psi))};
  });
}

SKS_API sks_status sks_mse(const sks_field* a, const sks_field* b, double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = sks::mse(a->value, b->value);
  });
}

SKS_API sks_status sks_normalize01(const sks_field* field, sks_field** out) {
  return guarded([&] {
    require(field != nullptr && out != nullptr, "null argument");
    *out = new sks_field{sks::normalize01(field->value)};
  });
}

SKS_API sks_status sks_strokes_read(const char* path, sks_strokes** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new sks_strokes{sks::read_strokes(path)};
  });
}

SKS_API sks_status sks_strokes_write(const sks_strokes* strokes, const char* path) {
  return guarded([&] {
    require(strokes != nullptr && path != nullptr, "null argument");
    sks::write_strokes(path, strokes->value);
  });
}

SKS_API size_t sks_strokes_count(const sks_strokes* strokes) {
  return strokes == nullptr ? 0 : strokes->value.strokes.size();
}

SKS_API void sks_strokes_destroy(sks_strokes* strokes) { delete strokes; }

SKS_API sks_status sks_streamlines(const sks_field* velocity, int32_t seeds, double h,
                                   int32_t max_steps, double min_speed, int32_t bidirectional,
                                   sks_strokes** out) {
  return guarded([&] {
    require(velocity != nullptr && out != nullptr, "null argument");
    require(seeds >= 0, "seed count must be >= 0");
    const sks::MacVelocity& vel = as_mac(velocity);
    sks::TraceParams params;
    params.h = h;
    params.max_steps = max_steps;
    if (min_speed >= 0.0) params.min_speed = min_speed;
    params.bidirectional = bidirectional != 0;
    const auto lines = sks::trace_streamlines(vel, seeds, params);
    const sks::Grid& g = vel.grid();
    *out = new sks_strokes{sks::polylines_to_strokes(lines, {g.width(), g.height()})};
  });
}

SKS_API sks_status sks_sketch_write_png(const sks_strokes* strokes, int32_t width, int32_t height,
                                        const char* path) {
  return guarded([&] {
    require(strokes != nullptr && path != nullptr, "null argument");
    sks::write_png(path, sks::render_sketch(strokes->value, width, height));
  });
}

SKS_API sks_status sks_reconstruct(const sks_strokes* strokes, int32_t nx, int32_t ny, double dx,
                                   double lambda, double tol, sks_field** psi_out,
                                   char** report_json) {
  return guarded([&] {
    require(strokes != nullptr && psi_out != nullptr, "null argument");
    sks::FitParams params;
    params.grid = dx > 0.0 ? sks::Grid{nx, ny, dx} : sks::Grid::unit(nx, ny);
    params.grid.validate();
    if (lambda > 0.0) params.lambda = lambda;
    if (tol > 0.0) params.tol = tol;
    auto [psi, report] = sks::fit_stream_function(strokes->value, params);
    std::string json = report.to_json();
    *psi_out = new sks_field{std::move(psi)};
    if (report_json != nullptr) *report_json = dup_string(json);
  });
}

SKS_API sks_status sks_external_generate(const sks_strokes* strokes, int32_t nx, int32_t ny,
                                         double dx, sks_field** psi_out, sks_field** velocity_out) {
  return guarded([&] {
    require(strokes != nullptr && psi_out != nullptr, "null argument");
    const sks::ExternalGenerators gen = sks::ExternalGenerators::from_environment();
    if (!gen.stage1) throw sks::Error(sks::ErrorCode::kNotFound, "STAGE1_CMD is not set");
    const sks::Grid grid = dx > 0.0 ? sks::Grid{nx, ny, dx} : sks::Grid::unit(nx, ny);
    grid.validate();
    sks::ScalarField psi = sks::run_stage1(*gen.stage1, strokes->value, grid);
    if (velocity_out != nullptr) {
      if (gen.stage2) {
        *velocity_out = new sks_field{sks::run_stage2(*gen.stage2, psi).field};
      } else {
        *velocity_out = new sks_field{sks::curl_velocity(psi)};
      }
    }
    *psi_out = new sks_field{std::move(psi)};
  });
}

SKS_API sks_status sks_validate_generated(const char* path, sks_field_kind expected, int32_t nx,
                                          int32_t ny, double dx, char** diagnostics_json) {
  return guarded([&] {
    require(path != nullptr, "null argument");
    require(expected >= SKS_NODE_SCALAR && expected <= SKS_MAC, "unknown field kind");
    const sks::Grid grid = dx > 0.0 ? sks::Grid{nx, ny, dx} : sks::Grid::unit(nx, ny);
    grid.validate();
    const auto v =
        sks::validate_generated_field(path, static_cast<sks::FieldKind>(expected), grid);
    if (diagnostics_json != nullptr) *diagnostics_json = dup_string(v.diagnostics.to_json());
  });
}

SKS_API sks_status sks_sim_create(const char* config_json, sks_sim** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const std::string text = config_json != nullptr && *config_json != '\0' ? config_json : "{}";
    sks::SimParams params = sks::parse_sim_params(text);
    sks::SimState state(params.grid);
    *out = new sks_sim{std::move(params), std::move(state), std::nullopt};
  });
}

SKS_API sks_status sks_sim_set_target(sks_sim* sim, const sks_field* target, double gain) {
  return guarded([&] {
    require(sim != nullptr, "null argument");
    require(std::isfinite(gain) && gain >= 0.0, "gain must be finite and >= 0");
    if (target == nullptr) {
      sim->target.reset();
    } else {
      const sks::MacVelocity& t = as_mac(target);
      if (!(t.grid() == sim->params.grid)) {
        throw sks::Error(sks::ErrorCode::kShape, "target grid does not match the simulation");
      }
      sim->target = t;
    }
    sim->params.guidance_gain = gain;
  });
}

SKS_API sks_status sks_sim_step(sks_sim* sim, sks_step_result* result) {
  sks::SolveStats failed;
  bool projection_failed = false;
  const sks_status status = guarded([&] {
    require(sim != nullptr, "null argument");
    try {
      const sks::StepReport r =
          sks::step(sim->state, sim->params, sim->target ? &*sim->target : nullptr);
      if (result != nullptr) *result = {r.cfl, to_c(r.projection)};
    } catch (const sks::ProjectionError& e) {
      failed = e.stats();
      projection_failed = true;
      throw;
    }
  });
  if (projection_failed && result != nullptr) *result = {0.0, to_c(failed)};
  return status;
}

SKS_API int32_t sks_sim_steps_requested(const sks_sim* sim) {
  return sim == nullptr ? 0 : sim->params.steps;
}

SKS_API sks_status sks_sim_density_png(const sks_sim* sim, const char* path) {
  return guarded([&] {
    require(sim != nullptr && path != nullptr, "null argument");
    sks::write_png(path, sks::render_cell_field(sim->state.density));
  });
}

SKS_API sks_status sks_sim_velocity(const sks_sim* sim, sks_field** out) {
  return guarded([&] {
    require(sim != nullptr && out != nullptr, "null argument");
    *out = new sks_field{sim->state.vel};
  });
}

SKS_API sks_status sks_sim_density(const sks_sim* sim, sks_field** out) {
  return guarded([&] {
    require(sim != nullptr && out != nullptr, "null argument");
    *out = new sks_field{sim->state.density};
  });
}

SKS_API void sks_sim_destroy(sks_sim* sim) { delete sim; }

SKS_API sks_status sks_dataset_generate(const char* config_json, char** summary_json) {
  return guarded([&] {
    require(config_json != nullptr, "null argument");
    const sks::DatasetSummary s = sks::generate_dataset(sks::parse_dataset_config(config_json));
    if (summary_json != nullptr) {
      const nlohmann::json j = {{"records", s.records.size()},
                                {"failures", s.failures},
                                {"manifest", s.manifest_path}};
      *summary_json = dup_string(j.dump());
    }
  });
}

SKS_API sks_status sks_serve(const char* host, int32_t port, int32_t max_sessions,
                             int32_t idle_timeout_secs) {
  return guarded([&] {
    require(port >= 0 && port <= 65535, "port must be in [0, 65535]");
    sks::ServiceOptions options;
    if (host != nullptr && *host != '\0') options.host = host;
    options.port = port;
    if (max_sessions > 0) options.max_sessions = max_sessions;
    if (idle_timeout_secs > 0) options.idle_timeout = std::chrono::seconds(idle_timeout_secs);
    options.generators = sks::ExternalGenerators::from_environment();
    sks::Service service(std::move(options));
    service.run();
  });
}

}  // extern "C"
