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

#include "sketchsmoke/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/hhd.hpp"
#include "sketchsmoke/image.hpp"
#include "sketchsmoke/streamline.hpp"

namespace sks {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double mse(const AnyField& a, const AnyField& b) {
  if (kind_of(a) != kind_of(b)) {
    throw Error(ErrorCode::kShape, std::string("kind mismatch: ") + kind_name(kind_of(a)) +
                                       " vs " + kind_name(kind_of(b)));
  }
  if (!(grid_of(a) == grid_of(b))) throw Error(ErrorCode::kShape, "dimension mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  auto accumulate = [&](std::span<const double> x, std::span<const double> y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - y[k];
      sum += d * d;
    }
    count += x.size();
  };
  if (const auto* sa = std::get_if<ScalarField>(&a)) {
    accumulate(sa->data(), std::get<ScalarField>(b).data());
  } else {
    const auto& ma = std::get<MacVelocity>(a);
    const auto& mb = std::get<MacVelocity>(b);
    accumulate(ma.u_data(), mb.u_data());
    accumulate(ma.v_data(), mb.v_data());
  }
  return sum / static_cast<double>(count);
}

namespace {

void normalize_in_place(std::span<double> first, std::span<double> second) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (double x : first) lo = std::min(lo, x), hi = std::max(hi, x);
  for (double x : second) lo = std::min(lo, x), hi = std::max(hi, x);
  auto map = [&](double& x) { x = hi > lo ? (x - lo) / (hi - lo) : 0.5; };
  std::for_each(first.begin(), first.end(), map);
  std::for_each(second.begin(), second.end(), map);
}

}  // namespace

ScalarField normalize01(const ScalarField& field) {
  ScalarField out = field;
  normalize_in_place(out.data(), {});
  return out;
}

AnyField normalize01(const AnyField& field) {
  if (const auto* s = std::get_if<ScalarField>(&field)) return normalize01(*s);
  MacVelocity out = std::get<MacVelocity>(field);
  normalize_in_place(out.u_data(), out.v_data());
  return out;
}

// ---------------------------------------------------------------------------
// Config and records
// ---------------------------------------------------------------------------

void DatasetConfig::validate() const {
  base.validate();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (sims < 1) fail("sims must be >= 1");
  if (steps < 0) fail("steps must be >= 0");
  if (snapshot_every < 1) fail("snapshot_every must be >= 1");
  for (const Range& r : {fx, fy, emitter_x, emitter_y, emitter_r, emitter_rate}) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      fail("parameter ranges must satisfy lo <= hi");
    }
  }
  if (seeds_k < 0) fail("seeds_k must be >= 0");
  if (sketch_width < 8 || sketch_height < 8) fail("sketch size must be at least 8x8");
  if (output_dir.empty()) fail("output_dir must be set");
}

namespace {

Range parse_range(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorCode::kParse, std::string(key) + " must be [lo, hi]");
  return {v[0], v[1]};
}

}  // namespace

DatasetConfig parse_dataset_config(const std::string& json_text) {
  DatasetConfig c;
  try {
    json j = json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "dataset config must be an object");
    static const std::set<std::string> known = {
        "sims",  "steps",    "snapshot_every", "seed", "output_dir", "seeds_k", "threads",
        "sketch", "grid",    "dt",             "rho",  "force_mode", "tol",     "ranges"};
    for (const auto& item : j.items()) {
      if (!known.count(item.key())) {
        throw Error(ErrorCode::kParse, "unknown key '" + item.key() + "' in dataset config");
      }
    }
    c.sims = j.value("sims", c.sims);
    c.steps = j.value("steps", c.steps);
    c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seeds_k = j.value("seeds_k", c.seeds_k);
    c.threads = j.value("threads", c.threads);
    if (j.contains("sketch")) {
      c.sketch_width = j["sketch"].value("width", c.sketch_width);
      c.sketch_height = j["sketch"].value("height", c.sketch_height);
    }
    // Simulation settings share the simulation config schema.
    json sim = json::object();
    for (const char* key : {"grid", "dt", "rho", "force_mode", "tol"}) {
      if (j.contains(key)) sim[key] = j[key];
    }
    c.base = parse_sim_params(sim.dump());
    if (j.contains("ranges")) {
      const json& r = j.at("ranges");
      c.fx = parse_range(r, "fx", c.fx);
      c.fy = parse_range(r, "fy", c.fy);
      c.emitter_x = parse_range(r, "emitter_x", c.emitter_x);
      c.emitter_y = parse_range(r, "emitter_y", c.emitter_y);
      c.emitter_r = parse_range(r, "emitter_r", c.emitter_r);
      c.emitter_rate = parse_range(r, "emitter_rate", c.emitter_rate);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("invalid dataset config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string DatasetRecord::to_json() const {
  json j;
  j["id"] = id;
  j["sim_id"] = sim_id;
  j["frame"] = frame;
  j["velocity"] = velocity_path;
  j["psi"] = psi_path;
  j["sketch"] = sketch_path;
  j["params"] = json::parse(sim_params_to_json(params));
  j["max_divergence"] = max_divergence;
  return j.dump();
}

DatasetRecord DatasetRecord::from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    DatasetRecord r;
    r.id = j.at("id").get<std::string>();
    r.sim_id = j.at("sim_id").get<int>();
    r.frame = j.at("frame").get<int>();
    r.velocity_path = j.at("velocity").get<std::string>();
    r.psi_path = j.at("psi").get<std::string>();
    r.sketch_path = j.at("sketch").get<std::string>();
    r.params = parse_sim_params(j.at("params").dump());
    r.max_divergence = j.value("max_divergence", 0.0);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("invalid manifest record: ") + e.what());
  }
}

std::vector<DatasetRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "file not found: " + path);
  std::vector<DatasetRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(DatasetRecord::from_json(line));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

struct SimOutcome {
  std::vector<DatasetRecord> records;
  std::string failure;
};

SimParams sample_params(const DatasetConfig& config, int sim_id) {
  const std::uint64_t sub_seed = splitmix64(config.seed + static_cast<std::uint64_t>(sim_id));
  Rng rng(sub_seed);
  SimParams p = config.base;
  p.seed = sub_seed;
  p.steps = config.steps;
  p.guidance_gain = 0.0;
  p.f_e.x = rng.uniform(config.fx);
  p.f_e.y = rng.uniform(config.fy);
  p.emitter.center.x = rng.uniform(config.emitter_x) * p.grid.width();
  p.emitter.center.y = rng.uniform(config.emitter_y) * p.grid.height();
  p.emitter.radius = rng.uniform(config.emitter_r) * p.grid.width();
  p.emitter.rate = rng.uniform(config.emitter_rate);
  return p;
}

std::string record_name(int sim_id, int frame, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sim%04d_frame%05d%s", sim_id, frame, suffix);
  return buf;
}

SimOutcome run_sim(const DatasetConfig& config, int sim_id) {
  SimOutcome outcome;
  const std::filesystem::path dir(config.output_dir);
  try {
    const SimParams params = sample_params(config, sim_id);
    SimState state(params.grid);
    SolveOptions psi_options;
    psi_options.tol = params.tol;
    for (int k = 1; k <= config.steps; ++k) {
      step(state, params);
      if (k % config.snapshot_every != 0) continue;

      const double divergence = max_abs_divergence(state.vel);
      // Everything downstream sees exactly the stored f32 velocity.
      const MacVelocity vel = std::get<MacVelocity>(narrow_to_f32(state.vel));
      auto [psi, stats] = stream_function(vel, psi_options);
      if (!stats.converged) {
        throw Error(ErrorCode::kSolver, "stream function solve did not converge");
      }
      const auto lines = trace_streamlines(vel, config.seeds_k, TraceParams{});
      const GrayImage sketch = render_sketch(lines, {params.grid.width(), params.grid.height()},
                                             config.sketch_width, config.sketch_height);

      DatasetRecord rec;
      rec.id = record_name(sim_id, k, "");
      rec.sim_id = sim_id;
      rec.frame = k;
      rec.velocity_path = record_name(sim_id, k, "_velocity.sfld");
      rec.psi_path = record_name(sim_id, k, "_psi.sfld");
      rec.sketch_path = record_name(sim_id, k, "_sketch.png");
      rec.params = params;
      rec.max_divergence = divergence;
      write_field((dir / rec.velocity_path).string(), vel);
      write_field((dir / rec.psi_path).string(), psi);
      write_png((dir / rec.sketch_path).string(), sketch);
      outcome.records.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    outcome.failure = "sim " + std::to_string(sim_id) + ": " + e.what();
  }
  return outcome;
}

}  // namespace

DatasetSummary generate_dataset(const DatasetConfig& config) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory: " + config.output_dir);

  std::vector<SimOutcome> outcomes(static_cast<std::size_t>(config.sims));
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, config.sims);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int s = next++; s < config.sims; s = next++) outcomes[s] = run_sim(config, s);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  DatasetSummary summary;
  summary.manifest_path = (std::filesystem::path(config.output_dir) / "manifest.jsonl").string();
  std::ofstream manifest(summary.manifest_path, std::ios::trunc);
  if (!manifest) throw Error(ErrorCode::kIo, "cannot write manifest: " + summary.manifest_path);
  for (SimOutcome& o : outcomes) {
    for (DatasetRecord& r : o.records) {
      manifest << r.to_json() << '\n';
      summary.records.push_back(std::move(r));
    }
    if (!o.failure.empty()) {
      std::cerr << "dataset: aborted " << o.failure << '\n';
      summary.failures.push_back(std::move(o.failure));
    }
  }
  manifest.flush();
  if (!manifest) throw Error(ErrorCode::kIo, "write failed: " + summary.manifest_path);
  return summary;
}

}  // namespace sks
