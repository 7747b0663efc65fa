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

// sketchsmoke: command-line front end over the C API.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or solver failure.
// Results go to stdout; diagnostics go to stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sketchsmoke/sketchsmoke.h"

namespace {

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(sks_status status) {
  if (status != SKS_OK) throw RuntimeFailure(sks_last_error());
}

struct FieldDeleter {
  void operator()(sks_field* f) const { sks_field_destroy(f); }
};
struct StrokesDeleter {
  void operator()(sks_strokes* s) const { sks_strokes_destroy(s); }
};
struct SimDeleter {
  void operator()(sks_sim* s) const { sks_sim_destroy(s); }
};
struct StringDeleter {
  void operator()(char* s) const { sks_string_free(s); }
};
using Field = std::unique_ptr<sks_field, FieldDeleter>;
using Strokes = std::unique_ptr<sks_strokes, StrokesDeleter>;
using Sim = std::unique_ptr<sks_sim, SimDeleter>;
using CString = std::unique_ptr<char, StringDeleter>;

Field read_field(const std::string& path) {
  sks_field* f = nullptr;
  check(sks_field_read(path.c_str(), &f));
  return Field(f);
}

Strokes read_strokes(const std::string& path) {
  sks_strokes* s = nullptr;
  check(sks_strokes_read(path.c_str(), &s));
  return Strokes(s);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_number(const char* label, double value) {
  if (label != nullptr) std::printf("%s ", label);
  std::printf("%.5e\n", value);
}

void print_stats(const char* label, const sks_solve_stats& s) {
  std::printf("%s_iterations %d\n", label, s.iterations);
  std::printf("%s_final_residual %.5e\n", label, s.final_residual);
  std::printf("%s_converged %d\n", label, s.converged);
}

sks_field_kind parse_kind(const std::string& name) {
  if (name == "node") return SKS_NODE_SCALAR;
  if (name == "cell") return SKS_CELL_SCALAR;
  if (name == "mac") return SKS_MAC;
  throw CLI::ValidationError("--kind", "must be node, cell or mac");
}

// --- simulate / guide --------------------------------------------------------

struct SimulateArgs {
  std::string config;
  int steps = -1;
  std::string velocity_out;
  std::string frames_dir;
  int frame_every = 1;
  std::string target;
  double gain = 0.0;
};

void add_simulate_flags(CLI::App* cmd, SimulateArgs& a) {
  cmd->add_option("--config", a.config, "simulation config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--steps", a.steps, "override the configured step count")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--velocity-out", a.velocity_out, "final velocity SFLD");
  cmd->add_option("--frames-dir", a.frames_dir, "directory for density PNG frames");
  cmd->add_option("--frame-every", a.frame_every, "write a frame every N steps")
      ->check(CLI::PositiveNumber);
}

int run_simulate(const SimulateArgs& a, bool guided) {
  const std::string config = a.config.empty() ? "{}" : read_text(a.config);
  sks_sim* raw = nullptr;
  check(sks_sim_create(config.c_str(), &raw));
  Sim sim(raw);
  if (guided) {
    Field target = read_field(a.target);
    check(sks_sim_set_target(sim.get(), target.get(), a.gain));
  }
  const int steps = a.steps >= 0 ? a.steps : sks_sim_steps_requested(sim.get());
  if (!a.frames_dir.empty()) std::filesystem::create_directories(a.frames_dir);

  auto write_frame = [&](int k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05d.png", k);
    check(sks_sim_density_png(sim.get(), (std::filesystem::path(a.frames_dir) / name).c_str()));
  };
  double cfl_max = 0.0;
  for (int k = 1; k <= steps; ++k) {
    sks_step_result r{};
    const sks_status status = sks_sim_step(sim.get(), &r);
    if (status != SKS_OK) {
      std::fprintf(stderr, "step %d: iterations %d, residual %.5e\n", k, r.projection.iterations,
                   r.projection.final_residual);
      check(status);
    }
    cfl_max = std::max(cfl_max, r.cfl);
    if (!a.frames_dir.empty() && k % a.frame_every == 0) write_frame(k);
  }
  if (!a.velocity_out.empty()) {
    sks_field* v = nullptr;
    check(sks_sim_velocity(sim.get(), &v));
    Field vel(v);
    check(sks_field_write(vel.get(), a.velocity_out.c_str()));
  }
  std::printf("steps %d\n", steps);
  print_number("cfl_max", cfl_max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketch-guided 2D smoke: simulation, stream functions, streamlines, reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sketchsmoke 1.0 (abi " + std::to_string(sks_abi_version()) + ")");

  // simulate
  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run a smoke simulation");
  add_simulate_flags(simulate, sim_args);

  // guide
  SimulateArgs guide_args;
  auto* guide = app.add_subcommand("guide", "simulate with a guidance target velocity");
  add_simulate_flags(guide, guide_args);
  guide->add_option("--target", guide_args.target, "target MAC velocity SFLD")
      ->required()
      ->check(CLI::ExistingFile);
  guide->add_option("--gain", guide_args.gain, "guidance gain k_g")
      ->required()
      ->check(CLI::NonNegativeNumber);

  // hhd
  std::string hhd_in, hhd_psi, hhd_harmonic;
  double hhd_tol = 1e-10;
  auto* hhd = app.add_subcommand("hhd", "Helmholtz-Hodge decomposition of a MAC velocity");
  hhd->add_option("--in", hhd_in, "velocity SFLD")->required();
  hhd->add_option("--psi-out", hhd_psi, "stream function SFLD");
  hhd->add_option("--harmonic-out", hhd_harmonic, "harmonic remainder SFLD");
  hhd->add_option("--tol", hhd_tol, "CG relative tolerance")->check(CLI::PositiveNumber);

  // curl
  std::string curl_in, curl_out;
  auto* curl = app.add_subcommand("curl", "velocity from a node stream function");
  curl->add_option("--in", curl_in, "stream function SFLD")->required();
  curl->add_option("--out", curl_out, "velocity SFLD")->required();

  // streamlines
  std::string sl_in, sl_out;
  int sl_seeds = 512, sl_max_steps = 0, sl_bidirectional = 0;
  double sl_h = 0.0, sl_min_speed = 1e-4;
  auto* streamlines = app.add_subcommand("streamlines", "trace streamlines from the fastest cells");
  streamlines->add_option("--in", sl_in, "velocity SFLD")->required();
  streamlines->add_option("--out", sl_out, "strokes JSON")->required();
  streamlines->add_option("--seeds", sl_seeds, "number of seeds")->check(CLI::NonNegativeNumber);
  streamlines->add_option("--step-size", sl_h, "RK4 step (default 0.5 dx)");
  streamlines->add_option("--max-steps", sl_max_steps, "step limit (default 4 max(nx, ny))");
  streamlines->add_option("--min-speed", sl_min_speed, "termination speed")
      ->check(CLI::NonNegativeNumber);
  streamlines->add_flag("--bidirectional", sl_bidirectional, "also trace backwards");

  // sketch
  std::string sk_in, sk_out;
  int sk_width = 256, sk_height = 256;
  auto* sketch = app.add_subcommand("sketch", "rasterize strokes to a PNG");
  sketch->add_option("--in", sk_in, "strokes JSON")->required();
  sketch->add_option("--out", sk_out, "PNG path")->required();
  sketch->add_option("--width", sk_width, "image width")->check(CLI::Range(8, 16384));
  sketch->add_option("--height", sk_height, "image height")->check(CLI::Range(8, 16384));

  // reconstruct
  std::string rc_in, rc_out, rc_velocity;
  int rc_nx = 64, rc_ny = 64;
  double rc_dx = 0.0, rc_lambda = 0.0, rc_tol = 1e-10;
  auto* reconstruct = app.add_subcommand(
      "reconstruct", "stream function from directed strokes (STAGE1_CMD/STAGE2_CMD if set)");
  reconstruct->add_option("--in", rc_in, "strokes JSON")->required();
  reconstruct->add_option("--out", rc_out, "stream function SFLD")->required();
  reconstruct->add_option("--velocity-out", rc_velocity, "velocity SFLD");
  reconstruct->add_option("--nx", rc_nx, "cells along x")->check(CLI::Range(2, 1 << 14));
  reconstruct->add_option("--ny", rc_ny, "cells along y")->check(CLI::Range(2, 1 << 14));
  reconstruct->add_option("--dx", rc_dx, "cell size (default 1/nx)");
  reconstruct->add_option("--lambda", rc_lambda, "smoothness weight (default 1e-2)");
  reconstruct->add_option("--tol", rc_tol, "CG relative tolerance")->check(CLI::PositiveNumber);

  // dataset
  std::string ds_config, ds_out;
  auto* dataset = app.add_subcommand("dataset", "generate (sketch, psi, velocity) training data");
  dataset->add_option("--config", ds_config, "dataset config JSON")->required();
  dataset->add_option("--out", ds_out, "output directory (overrides the config)");

  // eval
  auto* eval = app.add_subcommand("eval", "field metrics");
  eval->require_subcommand(1);
  std::string mse_a, mse_b;
  auto* eval_mse = eval->add_subcommand("mse", "mean squared error of two fields");
  eval_mse->add_option("--a", mse_a, "first SFLD")->required();
  eval_mse->add_option("--b", mse_b, "second SFLD")->required();
  std::string norm_in, norm_out;
  auto* eval_norm = eval->add_subcommand("normalize", "rescale a field into [0, 1]");
  eval_norm->add_option("--in", norm_in, "input SFLD")->required();
  eval_norm->add_option("--out", norm_out, "output SFLD")->required();
  std::string val_in, val_kind = "mac";
  int val_nx = 64, val_ny = 64;
  double val_dx = 0.0;
  auto* eval_validate = eval->add_subcommand("validate", "check a generated field file");
  eval_validate->add_option("--in", val_in, "SFLD to check")->required();
  eval_validate->add_option("--kind", val_kind, "node, cell or mac");
  eval_validate->add_option("--nx", val_nx, "expected nx");
  eval_validate->add_option("--ny", val_ny, "expected ny");
  eval_validate->add_option("--dx", val_dx, "expected dx (default 1/nx)");

  // serve
  std::string sv_host = "127.0.0.1";
  int sv_port = 8080, sv_max_sessions = 64, sv_idle = 600;
  auto* serve = app.add_subcommand("serve", "HTTP session API");
  serve->add_option("--host", sv_host, "bind address");
  serve->add_option("--port", sv_port, "port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--max-sessions", sv_max_sessions, "session capacity")
      ->check(CLI::PositiveNumber);
  serve->add_option("--idle-timeout-secs", sv_idle, "idle session expiry")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return run_simulate(sim_args, false);
    if (*guide) return run_simulate(guide_args, true);

    if (*hhd) {
      Field vel = read_field(hhd_in);
      sks_field* psi = nullptr;
      sks_field* harmonic = nullptr;
      sks_hhd_result r{};
      check(sks_decompose(vel.get(), hhd_tol, &psi, &harmonic, &r));
      Field psi_f(psi), harmonic_f(harmonic);
      if (!hhd_psi.empty()) check(sks_field_write(psi_f.get(), hhd_psi.c_str()));
      if (!hhd_harmonic.empty()) check(sks_field_write(harmonic_f.get(), hhd_harmonic.c_str()));
      print_number("residual_norm", r.residual_norm);
      print_number("potential_ratio", r.potential_norm_ratio);
      print_stats("psi", r.psi_stats);
      print_stats("potential", r.potential_stats);
      return r.psi_stats.converged && r.potential_stats.converged ? 0 : 2;
    }

    if (*curl) {
      Field psi = read_field(curl_in);
      sks_field* v = nullptr;
      check(sks_curl(psi.get(), &v));
      Field vel(v);
      check(sks_field_write(vel.get(), curl_out.c_str()));
      return 0;
    }

    if (*streamlines) {
      Field vel = read_field(sl_in);
      sks_strokes* s = nullptr;
      check(sks_streamlines(vel.get(), sl_seeds, sl_h, sl_max_steps, sl_min_speed,
                            sl_bidirectional, &s));
      Strokes strokes(s);
      check(sks_strokes_write(strokes.get(), sl_out.c_str()));
      std::printf("strokes %zu\n", sks_strokes_count(strokes.get()));
      return 0;
    }

    if (*sketch) {
      Strokes strokes = read_strokes(sk_in);
      check(sks_sketch_write_png(strokes.get(), sk_width, sk_height, sk_out.c_str()));
      return 0;
    }

    if (*reconstruct) {
      Strokes strokes = read_strokes(rc_in);
      sks_field* psi = nullptr;
      sks_field* vel = nullptr;
      const sks_status ext = sks_external_generate(strokes.get(), rc_nx, rc_ny, rc_dx, &psi,
                                                   rc_velocity.empty() ? nullptr : &vel);
      if (ext == SKS_OK) {
        std::fprintf(stderr, "using external generators\n");
        std::printf("{\"external\":true}\n");
      } else if (ext == SKS_NOT_FOUND) {
        char* report = nullptr;
        check(sks_reconstruct(strokes.get(), rc_nx, rc_ny, rc_dx, rc_lambda, rc_tol, &psi,
                              &report));
        CString report_s(report);
        std::printf("%s\n", report_s.get());
        if (!rc_velocity.empty()) check(sks_curl(psi, &vel));
      } else {
        check(ext);
      }
      Field psi_f(psi), vel_f(vel);
      check(sks_field_write(psi_f.get(), rc_out.c_str()));
      if (vel_f) check(sks_field_write(vel_f.get(), rc_velocity.c_str()));
      return 0;
    }

    if (*dataset) {
      std::string config = read_text(ds_config);
      if (!ds_out.empty()) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(config);
        } catch (const nlohmann::json::exception& e) {
          throw RuntimeFailure(std::string("invalid dataset config: ") + e.what());
        }
        j["output_dir"] = ds_out;
        config = j.dump();
      }
      char* summary = nullptr;
      check(sks_dataset_generate(config.c_str(), &summary));
      CString summary_s(summary);
      std::printf("%s\n", summary_s.get());
      return 0;
    }

    if (*eval_mse) {
      Field a = read_field(mse_a);
      Field b = read_field(mse_b);
      double value = 0.0;
      check(sks_mse(a.get(), b.get(), &value));
      print_number(nullptr, value);
      return 0;
    }
    if (*eval_norm) {
      Field in = read_field(norm_in);
      sks_field* out = nullptr;
      check(sks_normalize01(in.get(), &out));
      Field out_f(out);
      check(sks_field_write(out_f.get(), norm_out.c_str()));
      return 0;
    }
    if (*eval_validate) {
      sks_field_kind kind;
      try {
        kind = parse_kind(val_kind);
      } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
      }
      char* diag = nullptr;
      check(sks_validate_generated(val_in.c_str(), kind, val_nx, val_ny, val_dx, &diag));
      CString diag_s(diag);
      std::printf("%s\n", diag_s.get());
      return 0;
    }

    if (*serve) {
      check(sks_serve(sv_host.c_str(), sv_port, sv_max_sessions, sv_idle));
      return 0;
    }
  } catch (const RuntimeFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
