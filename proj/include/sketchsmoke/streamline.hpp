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

// Streamline synthesis: seeds at cell centres ranked by speed, fixed-step RK4
// tracing, and rasterisation into sketch images.

#ifndef SKETCHSMOKE_STREAMLINE_HPP_
#define SKETCHSMOKE_STREAMLINE_HPP_

#include <string>
#include <vector>

#include "sketchsmoke/fields.hpp"
#include "sketchsmoke/image.hpp"
#include "sketchsmoke/strokes.hpp"

namespace sks {

inline constexpr int kDefaultSeedCount = 512;
inline constexpr int kDefaultSketchSize = 256;

struct Polyline {
  std::vector<Vec2> points;
  double seed_speed = 0.0;
};

struct TraceParams {
  double h = 0.0;           // <= 0 selects 0.5 * dx
  int max_steps = 0;        // <= 0 selects 4 * max(nx, ny)
  double min_speed = 1e-4;
  bool bidirectional = false;

  TraceParams resolved(const Grid& grid) const;
};

struct Seed {
  Vec2 position;
  double speed = 0.0;
};

/// The min(k, nx*ny) fastest cell centres, fastest first; equal speeds keep
/// (j, i) order.
std::vector<Seed> select_seeds(const MacVelocity& vel, int k);

/// Integrates dx/ds = u(x)/|u(x)| from `seed` with classical RK4 at fixed
/// arc-length step h.
/// Stops before leaving the domain, when the local speed drops below
/// min_speed, or after max_steps steps. The seed is the first point.
Polyline trace(const MacVelocity& vel, Vec2 seed, const TraceParams& params);

/// select_seeds + trace for every seed.
std::vector<Polyline> trace_streamlines(const MacVelocity& vel, int k, const TraceParams& params);

/// White background, 1-pixel black Bresenham segments. Domain (x, y) maps to
/// pixel (x / Lx * (w - 1), (1 - y / Ly) * (h - 1)), rounded to nearest.
GrayImage render_sketch(const std::vector<Polyline>& polylines, Vec2 domain, int width,
                        int height);
GrayImage render_sketch(const StrokeSet& strokes, int width, int height);

/// Traced polylines as a stroke set; each stroke carries its seed speed.
StrokeSet polylines_to_strokes(const std::vector<Polyline>& polylines, Vec2 domain);

}  // namespace sks

#endif  // SKETCHSMOKE_STREAMLINE_HPP_
