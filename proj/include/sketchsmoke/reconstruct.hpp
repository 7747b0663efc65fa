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

// Stream-function reconstruction from directed strokes, and admission of
// fields produced by external generator processes.
//
// The fit minimises
//   sum_s |curl(psi)(x_s) - speed * t_s|^2 + lambda * dx^2 * sum_nodes (L psi)^2
// over zero-boundary node fields, where x_s are samples along the strokes,
// t_s the unit tangents in drawing order and L the 5-point Laplacian. The
// normal equations are solved with CG.

#ifndef SKETCHSMOKE_RECONSTRUCT_HPP_
#define SKETCHSMOKE_RECONSTRUCT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/poisson.hpp"
#include "sketchsmoke/strokes.hpp"

namespace sks {

struct FitParams {
  Grid grid = Grid::unit(64, 64);
  double lambda = 1e-2;
  double sample_spacing = 0.0;  // <= 0 selects dx
  double tol = 1e-10;
  int max_iterations = 0;       // <= 0 selects 10 * nx * ny
};

struct FitReport {
  bool no_constraints = false;
  int samples = 0;
  std::vector<double> stroke_mean_cosine;
  double median_cosine = 0.0;
  SolveStats solve;

  std::string to_json() const;
};

struct StrokeSample {
  Vec2 position;
  Vec2 tangent;  // unit, drawing direction
  double speed = 1.0;
  int stroke = 0;
};

/// Constraint samples: each segment is split into ceil(len / spacing) equal
/// pieces; interior vertices use the mean of the adjacent directions.
/// Positions are in the strokes' own domain coordinates.
std::vector<StrokeSample> sample_strokes(const StrokeSet& strokes, double spacing);

/// Strokes are rescaled from their domain onto the grid's domain. Throws
/// Error(kInvalidArgument) for degenerate strokes (see validate_for_fit).
std::pair<ScalarField, FitReport> fit_stream_function(const StrokeSet& strokes,
                                                      const FitParams& params);

// --- external generators ------------------------------------------------------

struct FieldDiagnostics {
  double max_divergence = 0.0;       // MAC fields only
  double max_boundary_normal = 0.0;  // MAC fields only

  std::string to_json() const;
};

struct ValidatedField {
  AnyField field;
  FieldDiagnostics diagnostics;
};

/// Parses an SFLD file and checks its kind and dimensions against `grid`.
/// Throws Error(kShape) with "kind mismatch" or "dimension mismatch".
ValidatedField validate_generated_field(const std::string& path, FieldKind expected_kind,
                                        const Grid& grid);

// Commands from STAGE1_CMD / STAGE2_CMD, run as `CMD <in-path> <out-path>`.
struct ExternalGenerators {
  std::optional<std::string> stage1;  // strokes JSON -> node psi SFLD
  std::optional<std::string> stage2;  // node psi SFLD -> MAC velocity SFLD

  static ExternalGenerators from_environment();
};

ScalarField run_stage1(const std::string& command, const StrokeSet& strokes, const Grid& grid);
ValidatedField run_stage2(const std::string& command, const ScalarField& psi);

}  // namespace sks

#endif  // SKETCHSMOKE_RECONSTRUCT_HPP_
