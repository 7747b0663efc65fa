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

#include "sketchsmoke/streamline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "sketchsmoke/error.hpp"

namespace sks {

TraceParams TraceParams::resolved(const Grid& grid) const {
  TraceParams p = *this;
  if (!(p.h > 0.0)) p.h = 0.5 * grid.dx;
  if (p.max_steps <= 0) p.max_steps = 4 * std::max(grid.nx, grid.ny);
  return p;
}

std::vector<Seed> select_seeds(const MacVelocity& vel, int k) {
  if (k <= 0) return {};
  const Grid& g = vel.grid();
  const int cells = g.nx * g.ny;
  std::vector<Seed> all(static_cast<std::size_t>(cells));
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 c{(i + 0.5) * g.dx, (j + 0.5) * g.dx};
      const Vec2 u = sample(vel, c);
      all[static_cast<std::size_t>(j) * g.nx + i] = {c, std::hypot(u.x, u.y)};
    }
  }
  // Storage order is (j, i) ascending, so a stable sort keeps the tie-break.
  std::stable_sort(all.begin(), all.end(),
                   [](const Seed& a, const Seed& b) { return a.speed > b.speed; });
  all.resize(static_cast<std::size_t>(std::min(k, cells)));
  return all;
}

namespace {

bool inside(const Grid& g, Vec2 p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= g.width() && p.y <= g.height();
}

// Unit direction of the flow at x; zero where the flow stalls.
Vec2 direction(const MacVelocity& vel, Vec2 x) {
  const Vec2 u = sample(vel, x);
  const double s = std::hypot(u.x, u.y);
  if (s == 0.0) return {0.0, 0.0};
  return {u.x / s, u.y / s};
}

// Integrates the unit direction field (h is arc length) with signed step h;
// appends to `points`.
void integrate(const MacVelocity& vel, Vec2 x, double h, const TraceParams& p,
               std::vector<Vec2>& points) {
  const Grid& g = vel.grid();
  for (int n = 0; n < p.max_steps; ++n) {
    const Vec2 u = sample(vel, x);
    if (std::hypot(u.x, u.y) < p.min_speed) break;
    const Vec2 k1 = direction(vel, x);
    const Vec2 k2 = direction(vel, {x.x + 0.5 * h * k1.x, x.y + 0.5 * h * k1.y});
    const Vec2 k3 = direction(vel, {x.x + 0.5 * h * k2.x, x.y + 0.5 * h * k2.y});
    const Vec2 k4 = direction(vel, {x.x + h * k3.x, x.y + h * k3.y});
    const Vec2 next{x.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                    x.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
    if (!inside(g, next)) break;
    points.push_back(next);
    x = next;
  }
}

}  // namespace

Polyline trace(const MacVelocity& vel, Vec2 seed, const TraceParams& params) {
  const Grid& g = vel.grid();
  if (!std::isfinite(seed.x) || !std::isfinite(seed.y) || !inside(g, seed)) {
    throw Error(ErrorCode::kInvalidArgument, "seed outside the domain");
  }
  const TraceParams p = params.resolved(g);
  Polyline line;
  const Vec2 u = sample(vel, seed);
  line.seed_speed = std::hypot(u.x, u.y);

  if (p.bidirectional) {
    std::vector<Vec2> back;
    integrate(vel, seed, -p.h, p, back);
    line.points.assign(back.rbegin(), back.rend());
  }
  line.points.push_back(seed);
  integrate(vel, seed, p.h, p, line.points);
  return line;
}

std::vector<Polyline> trace_streamlines(const MacVelocity& vel, int k, const TraceParams& params) {
  std::vector<Polyline> lines;
  for (const Seed& s : select_seeds(vel, k)) lines.push_back(trace(vel, s.position, params));
  return lines;
}

// ---------------------------------------------------------------------------
// Rasterisation
// ---------------------------------------------------------------------------

namespace {

struct Pixel {
  long x;
  long y;
};

Pixel to_pixel(Vec2 p, Vec2 domain, int width, int height) {
  return {std::lround(p.x / domain.x * (width - 1)),
          std::lround((1.0 - p.y / domain.y) * (height - 1))};
}

void plot(GrayImage& img, long x, long y) {
  if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.at(int(x), int(y)) = 0;
}

// Endpoints are ordered first so a segment covers the same pixels whichever
// way it is traversed.
void bresenham(GrayImage& img, Pixel a, Pixel b) {
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  const long dx = std::labs(b.x - a.x);
  const long dy = -std::labs(b.y - a.y);
  const long sx = a.x < b.x ? 1 : -1;
  const long sy = a.y < b.y ? 1 : -1;
  long err = dx + dy;
  long x = a.x;
  long y = a.y;
  for (;;) {
    plot(img, x, y);
    if (x == b.x && y == b.y) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void draw_polyline(GrayImage& img, const std::vector<Vec2>& points, Vec2 domain) {
  if (points.empty()) return;
  Pixel prev = to_pixel(points.front(), domain, img.width, img.height);
  plot(img, prev.x, prev.y);
  for (std::size_t k = 1; k < points.size(); ++k) {
    const Pixel cur = to_pixel(points[k], domain, img.width, img.height);
    bresenham(img, prev, cur);
    prev = cur;
  }
}

void check_sketch_args(Vec2 domain, int width, int height) {
  if (width < 8 || height < 8) {
    throw Error(ErrorCode::kInvalidArgument, "sketch size must be at least 8x8");
  }
  if (!(domain.x > 0.0) || !(domain.y > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "domain extents must be positive");
  }
}

}  // namespace

GrayImage render_sketch(const std::vector<Polyline>& polylines, Vec2 domain, int width,
                        int height) {
  check_sketch_args(domain, width, height);
  GrayImage img(width, height, 255);
  for (const Polyline& line : polylines) draw_polyline(img, line.points, domain);
  return img;
}

GrayImage render_sketch(const StrokeSet& strokes, int width, int height) {
  check_sketch_args(strokes.domain, width, height);
  GrayImage img(width, height, 255);
  for (const Stroke& s : strokes.strokes) draw_polyline(img, s.points, strokes.domain);
  return img;
}

StrokeSet polylines_to_strokes(const std::vector<Polyline>& polylines, Vec2 domain) {
  StrokeSet set;
  set.domain = domain;
  for (const Polyline& line : polylines) set.strokes.push_back({line.points, line.seed_speed});
  return set;
}

}  // namespace sks
