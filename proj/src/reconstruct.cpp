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

#include "sketchsmoke/reconstruct.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "json.hpp"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/hhd.hpp"

namespace sks {

std::string FitReport::to_json() const {
  nlohmann::json j;
  j["no_constraints"] = no_constraints;
  j["samples"] = samples;
  j["stroke_mean_cosine"] = stroke_mean_cosine;
  j["median_cosine"] = median_cosine;
  j["converged"] = solve.converged;
  j["iterations"] = solve.iterations;
  j["final_residual"] = solve.final_residual;
  return j.dump();
}

std::string FieldDiagnostics::to_json() const {
  nlohmann::json j;
  j["max_divergence"] = max_divergence;
  j["max_boundary_normal"] = max_boundary_normal;
  return j.dump();
}

namespace {

Vec2 unit_direction(Vec2 a, Vec2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  return {dx / len, dy / len};
}

}  // namespace

std::vector<StrokeSample> sample_strokes(const StrokeSet& strokes, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sample spacing must be positive");
  std::vector<StrokeSample> samples;
  for (std::size_t s = 0; s < strokes.strokes.size(); ++s) {
    const Stroke& stroke = strokes.strokes[s];
    const auto& pts = stroke.points;
    const int stroke_id = static_cast<int>(s);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const Vec2 a = pts[k];
      const Vec2 b = pts[k + 1];
      const Vec2 t = unit_direction(a, b);
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / spacing)));

      // Vertex a: segment start, or a bend shared with the previous segment.
      Vec2 ta = t;
      if (k > 0) {
        const Vec2 tp = unit_direction(pts[k - 1], a);
        const double mx = tp.x + t.x;
        const double my = tp.y + t.y;
        const double ml = std::hypot(mx, my);
        ta = ml > 0.0 ? Vec2{mx / ml, my / ml} : t;
      }
      samples.push_back({a, ta, stroke.speed, stroke_id});
      // Interior points use a symmetric blend so that the reversed stroke
      // produces bitwise identical positions.
      for (int q = 1; q < pieces; ++q) {
        const double wb = static_cast<double>(q) / pieces;
        const double wa = static_cast<double>(pieces - q) / pieces;
        samples.push_back({{wa * a.x + wb * b.x, wa * a.y + wb * b.y}, t, stroke.speed, stroke_id});
      }
      if (k + 2 == pts.size()) samples.push_back({b, t, stroke.speed, stroke_id});
    }
  }
  return samples;
}

namespace {

struct Term {
  int node;  // index into the interior unknowns
  double coeff;
};
using Row = std::vector<Term>;

class CurlSampler {
 public:
  explicit CurlSampler(const Grid& grid) : g_(grid), m_(grid.nx - 1) {}

  // Row for the u or v component of curl(psi) at `pos`.
  Row row(Vec2 pos, bool u_component) const {
    const int sx = u_component ? g_.nx + 1 : g_.nx;
    const int sy = u_component ? g_.ny : g_.ny + 1;
    const double ox = u_component ? 0.0 : 0.5;
    const double oy = u_component ? 0.5 : 0.0;
    const double fx = std::clamp(pos.x / g_.dx - ox, 0.0, static_cast<double>(sx - 1));
    const double fy = std::clamp(pos.y / g_.dx - oy, 0.0, static_cast<double>(sy - 1));
    const int i0 = std::min(static_cast<int>(fx), sx - 2);
    const int j0 = std::min(static_cast<int>(fy), sy - 2);
    const double tx = fx - i0;
    const double ty = fy - j0;
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const int fi[4] = {i0, i0 + 1, i0, i0 + 1};
    const int fj[4] = {j0, j0, j0 + 1, j0 + 1};

    Row r;
    const double inv_dx = 1.0 / g_.dx;
    for (int k = 0; k < 4; ++k) {
      if (w[k] == 0.0) continue;
      if (u_component) {
        // u(i, j) = (psi(i, j+1) - psi(i, j)) / dx
        add(r, fi[k], fj[k] + 1, w[k] * inv_dx);
        add(r, fi[k], fj[k], -w[k] * inv_dx);
      } else {
        // v(i, j) = -(psi(i+1, j) - psi(i, j)) / dx
        add(r, fi[k] + 1, fj[k], -w[k] * inv_dx);
        add(r, fi[k], fj[k], w[k] * inv_dx);
      }
    }
    return r;
  }

 private:
  void add(Row& r, int i, int j, double c) const {
    if (i <= 0 || j <= 0 || i >= g_.nx || j >= g_.ny) return;  // psi = 0 on walls
    r.push_back({(j - 1) * m_ + (i - 1), c});
  }

  Grid g_;
  int m_;
};

void laplacian_interior(std::span<const double> x, std::span<double> y, int m, int n,
                        double inv_h2) {
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * m + i;
      double s = 4.0 * x[k];
      if (i > 0) s -= x[k - 1];
      if (i + 1 < m) s -= x[k + 1];
      if (j > 0) s -= x[k - m];
      if (j + 1 < n) s -= x[k + m];
      y[k] = s * inv_h2;
    }
  }
}

double cosine(Vec2 a, Vec2 b) {
  const double na = std::hypot(a.x, a.y);
  const double nb = std::hypot(b.x, b.y);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return (a.x * b.x + a.y * b.y) / (na * nb);
}

}  // namespace

std::pair<ScalarField, FitReport> fit_stream_function(const StrokeSet& strokes,
                                                      const FitParams& params) {
  const Grid& g = params.grid;
  g.validate();
  if (!(params.lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  validate_for_fit(strokes);

  FitReport report;
  report.stroke_mean_cosine.assign(strokes.strokes.size(), 0.0);
  if (strokes.strokes.empty()) {
    report.no_constraints = true;
    return {ScalarField(g, Siting::kNode), std::move(report)};
  }

  StrokeSet scaled = strokes;
  const double sx = g.width() / strokes.domain.x;
  const double sy = g.height() / strokes.domain.y;
  scaled.domain = {g.width(), g.height()};
  for (Stroke& s : scaled.strokes) {
    for (Vec2& p : s.points) p = {p.x * sx, p.y * sy};
  }
  const double spacing = params.sample_spacing > 0.0 ? params.sample_spacing : g.dx;
  std::vector<StrokeSample> samples = sample_strokes(scaled, spacing);
  // Canonical order keeps the normal operator's summation order independent
  // of drawing direction.
  std::stable_sort(samples.begin(), samples.end(), [](const StrokeSample& a, const StrokeSample& b) {
    return a.position.y < b.position.y || (a.position.y == b.position.y && a.position.x < b.position.x);
  });
  report.samples = static_cast<int>(samples.size());

  const int m = g.nx - 1;
  const int n = g.ny - 1;
  const std::size_t unknowns = static_cast<std::size_t>(m) * n;
  const CurlSampler sampler(g);
  std::vector<Row> rows;
  std::vector<double> targets;
  rows.reserve(2 * samples.size());
  for (const StrokeSample& s : samples) {
    rows.push_back(sampler.row(s.position, true));
    targets.push_back(s.speed * s.tangent.x);
    rows.push_back(sampler.row(s.position, false));
    targets.push_back(s.speed * s.tangent.y);
  }

  std::vector<double> rhs(unknowns, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const Term& t : rows[r]) rhs[t.node] += t.coeff * targets[r];
  }

  const double inv_h2 = 1.0 / (g.dx * g.dx);
  const double reg = params.lambda * g.dx * g.dx;
  std::vector<double> lap(unknowns), lap2(unknowns);
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (const Row& row : rows) {
      double v = 0.0;
      for (const Term& t : row) v += t.coeff * x[t.node];
      for (const Term& t : row) y[t.node] += t.coeff * v;
    }
    if (reg > 0.0) {
      laplacian_interior(x, lap, m, n, inv_h2);
      laplacian_interior(lap, lap2, m, n, inv_h2);
      for (std::size_t k = 0; k < unknowns; ++k) y[k] += reg * lap2[k];
    }
  };

  std::vector<double> x(unknowns, 0.0);
  const int max_it = params.max_iterations > 0 ? params.max_iterations : 10 * g.nx * g.ny;
  report.solve = conjugate_gradient(apply, rhs, x, {}, params.tol, max_it, false);

  ScalarField psi(g, Siting::kNode);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) psi.at(i + 1, j + 1) = x[static_cast<std::size_t>(j) * m + i];
  }

  const MacVelocity vel = curl_velocity(psi);
  std::vector<double> all;
  std::vector<int> counts(strokes.strokes.size(), 0);
  for (const StrokeSample& s : samples) {
    const double c = cosine(sample(vel, s.position), s.tangent);
    all.push_back(c);
    report.stroke_mean_cosine[s.stroke] += c;
    counts[s.stroke] += 1;
  }
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > 0) report.stroke_mean_cosine[s] /= counts[s];
  }
  if (!all.empty()) {
    std::sort(all.begin(), all.end());
    const std::size_t h = all.size() / 2;
    report.median_cosine = all.size() % 2 == 1 ? all[h] : 0.5 * (all[h - 1] + all[h]);
  }
  return {std::move(psi), std::move(report)};
}

// ---------------------------------------------------------------------------
// External generators
// ---------------------------------------------------------------------------

ValidatedField validate_generated_field(const std::string& path, FieldKind expected_kind,
                                        const Grid& grid) {
  AnyField field = read_field(path);
  const FieldKind kind = kind_of(field);
  if (kind != expected_kind) {
    throw Error(ErrorCode::kShape, std::string("kind mismatch: expected ") +
                                       kind_name(expected_kind) + ", got " + kind_name(kind));
  }
  const Grid& g = grid_of(field);
  if (g.nx != grid.nx || g.ny != grid.ny) {
    throw Error(ErrorCode::kShape, "dimension mismatch: expected " + std::to_string(grid.nx) +
                                       "x" + std::to_string(grid.ny) + ", got " +
                                       std::to_string(g.nx) + "x" + std::to_string(g.ny));
  }
  if (std::abs(g.dx - grid.dx) > 1e-9 * grid.dx) {
    throw Error(ErrorCode::kShape, "dimension mismatch: cell spacing differs");
  }
  FieldDiagnostics diag;
  if (const auto* vel = std::get_if<MacVelocity>(&field)) {
    diag.max_divergence = max_abs_divergence(*vel);
    diag.max_boundary_normal = vel->max_boundary_normal();
  }
  return {std::move(field), diag};
}

ExternalGenerators ExternalGenerators::from_environment() {
  ExternalGenerators gens;
  if (const char* s1 = std::getenv("STAGE1_CMD"); s1 != nullptr && *s1 != '\0') gens.stage1 = s1;
  if (const char* s2 = std::getenv("STAGE2_CMD"); s2 != nullptr && *s2 != '\0') gens.stage2 = s2;
  return gens;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Scratch directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sketchsmoke-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

void run_command(const std::string& command, const std::string& in, const std::string& out) {
  const std::string line = command + " " + shell_quote(in) + " " + shell_quote(out);
  const int rc = std::system(line.c_str());
  if (rc != 0) {
    throw Error(ErrorCode::kIo, "external generator failed (status " + std::to_string(rc) +
                                    "): " + command);
  }
}

}  // namespace

ScalarField run_stage1(const std::string& command, const StrokeSet& strokes, const Grid& grid) {
  ScratchDir dir;
  const std::string in = dir.file("strokes.json");
  const std::string out = dir.file("psi.sfld");
  write_strokes(in, strokes);
  run_command(command, in, out);
  ValidatedField v = validate_generated_field(out, FieldKind::kNodeScalar, grid);
  return std::get<ScalarField>(std::move(v.field));
}

ValidatedField run_stage2(const std::string& command, const ScalarField& psi) {
  ScratchDir dir;
  const std::string in = dir.file("psi.sfld");
  const std::string out = dir.file("velocity.sfld");
  write_field(in, psi);
  run_command(command, in, out);
  return validate_generated_field(out, FieldKind::kMac, psi.grid());
}

}  // namespace sks
