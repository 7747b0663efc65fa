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

// Training-data generation of (sketch, stream function, velocity) triples
// from randomised smoke runs, plus the MSE metric and [0, 1] normalisation.
//
// Randomness comes from std::mt19937_64 (fully specified by the standard)
// with uniform doubles built from the top 53 bits, so datasets are
// reproducible across platforms. Each simulation gets its own sub-seed
// splitmix64(seed + sim_id).

#ifndef SKETCHSMOKE_DATASET_HPP_
#define SKETCHSMOKE_DATASET_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/sim.hpp"

namespace sks {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct DatasetConfig {
  int sims = 1;
  int steps = 80;
  int snapshot_every = 10;
  SimParams base;  // grid, dt, rho, force_mode, tol
  Range fx{-0.5, 0.5};
  Range fy{1.0, 4.0};
  Range emitter_x{0.3, 0.7};
  Range emitter_y{0.1, 0.3};
  Range emitter_r{0.05, 0.1};
  Range emitter_rate{2.0, 8.0};
  int seeds_k = 512;
  int sketch_width = 256;
  int sketch_height = 256;
  std::uint64_t seed = 0;
  std::string output_dir = "dataset";
  int threads = 0;  // <= 0 selects hardware concurrency

  void validate() const;
};

DatasetConfig parse_dataset_config(const std::string& json_text);

struct DatasetRecord {
  std::string id;
  int sim_id = 0;
  int frame = 0;
  std::string velocity_path;  // relative to the output directory
  std::string psi_path;
  std::string sketch_path;
  SimParams params;
  // Max cell divergence of the projected velocity before f32 storage.
  double max_divergence = 0.0;

  std::string to_json() const;
  static DatasetRecord from_json(const std::string& line);
};

struct DatasetSummary {
  std::vector<DatasetRecord> records;
  std::vector<std::string> failures;  // one message per aborted sim
  std::string manifest_path;
};

/// Runs config.sims simulations and writes velocity/psi SFLD, sketch PNG and
/// manifest.jsonl (one record per snapshot) under config.output_dir.
DatasetSummary generate_dataset(const DatasetConfig& config);

std::vector<DatasetRecord> read_manifest(const std::string& path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, 1) from the top 53 bits of one draw.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(Range r) { return r.lo + (r.hi - r.lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Mean of squared differences over all stored samples (u then v for MAC).
double mse(const AnyField& a, const AnyField& b);

/// (x - min) / (max - min); constant fields map to 0.5.
ScalarField normalize01(const ScalarField& field);
AnyField normalize01(const AnyField& field);

}  // namespace sks

#endif  // SKETCHSMOKE_DATASET_HPP_
