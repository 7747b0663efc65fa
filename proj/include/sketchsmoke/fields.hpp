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

// Grid geometry and field containers on a 2D MAC (staggered) grid.
//
// Site layout for a grid of nx x ny square cells of size dx:
//   node scalars   (i*dx, j*dx)             i in [0, nx],   j in [0, ny]
//   cell scalars   ((i+1/2)*dx, (j+1/2)*dx) i in [0, nx-1], j in [0, ny-1]
//   u faces        (i*dx, (j+1/2)*dx)       i in [0, nx],   j in [0, ny-1]
//   v faces        ((i+1/2)*dx, j*dx)       i in [0, nx-1], j in [0, ny]
// All arrays are row-major with j as the slow index.

#ifndef SKETCHSMOKE_FIELDS_HPP_
#define SKETCHSMOKE_FIELDS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sks {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Grid {
  int nx = 64;
  int ny = 64;
  double dx = 1.0 / 64.0;

  // Throws Error(kInvalidArgument) unless nx >= 2, ny >= 2 and dx > 0.
  void validate() const;

  double width() const { return nx * dx; }
  double height() const { return ny * dx; }

  // Unit-width domain: dx = 1 / nx.
  static Grid unit(int nx, int ny);

  friend bool operator==(const Grid&, const Grid&) = default;
};

enum class Siting { kNode, kCell };

class ScalarField {
 public:
  ScalarField(const Grid& grid, Siting siting);
  ScalarField(const Grid& grid, Siting siting, std::vector<double> data);

  const Grid& grid() const { return grid_; }
  Siting siting() const { return siting_; }

  // Number of sites along each axis.
  int sites_x() const { return siting_ == Siting::kNode ? grid_.nx + 1 : grid_.nx; }
  int sites_y() const { return siting_ == Siting::kNode ? grid_.ny + 1 : grid_.ny; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * sites_x() + i;
  }
  double& at(int i, int j) { return data_[index(i, j)]; }
  double at(int i, int j) const { return data_[index(i, j)]; }

  // Physical position of site (i, j).
  Vec2 site(int i, int j) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::size_t size() const { return data_.size(); }

 private:
  Grid grid_;
  Siting siting_;
  std::vector<double> data_;
};

class MacVelocity {
 public:
  explicit MacVelocity(const Grid& grid);
  MacVelocity(const Grid& grid, std::vector<double> u, std::vector<double> v);

  const Grid& grid() const { return grid_; }

  std::size_t u_index(int i, int j) const {
    return static_cast<std::size_t>(j) * (grid_.nx + 1) + i;
  }
  std::size_t v_index(int i, int j) const {
    return static_cast<std::size_t>(j) * grid_.nx + i;
  }
  double& u(int i, int j) { return u_[u_index(i, j)]; }
  double u(int i, int j) const { return u_[u_index(i, j)]; }
  double& v(int i, int j) { return v_[v_index(i, j)]; }
  double v(int i, int j) const { return v_[v_index(i, j)]; }

  std::span<double> u_data() { return u_; }
  std::span<const double> u_data() const { return u_; }
  std::span<double> v_data() { return v_; }
  std::span<const double> v_data() const { return v_; }

  // Sets u on the x = 0 and x = Lx faces and v on the y = 0 and y = Ly faces
  // to exactly zero (no-flux walls).
  void zero_boundary_faces();

  // Largest |u.n| over the wall faces.
  double max_boundary_normal() const;

 private:
  Grid grid_;
  std::vector<double> u_;
  std::vector<double> v_;
};

// Bilinear interpolation. The position is clamped into the rectangle spanned
// by the field's sites; the result is clamped to the range of the four
// stencil values so that rounding can never create new extrema.
double sample(const ScalarField& field, Vec2 pos);
double sample_u(const MacVelocity& vel, Vec2 pos);
double sample_v(const MacVelocity& vel, Vec2 pos);
Vec2 sample(const MacVelocity& vel, Vec2 pos);

namespace detail {
// Bilinear lookup in lattice coordinates (site (i, j) at (i, j)); the
// coordinates are clamped to [0, sites_x - 1] x [0, sites_y - 1].
double sample_lattice(std::span<const double> data, int sites_x, int sites_y, double fx,
                      double fy);
}  // namespace detail

// Cell-sited discrete divergence (flux sum / dx).
ScalarField divergence(const MacVelocity& vel);
double max_abs_divergence(const MacVelocity& vel);

// Discrete gradient of a cell scalar on interior faces; wall faces are zero.
MacVelocity gradient(const ScalarField& cell_field);

// --- SFLD file format -------------------------------------------------------

enum class FieldKind : std::uint8_t { kNodeScalar = 0, kCellScalar = 1, kMac = 2 };

using AnyField = std::variant<ScalarField, MacVelocity>;

FieldKind kind_of(const AnyField& field);
const Grid& grid_of(const AnyField& field);
const char* kind_name(FieldKind kind);

inline constexpr std::size_t kSfldHeaderBytes = 28;

std::vector<std::uint8_t> encode_field(const AnyField& field);
AnyField decode_field(std::span<const std::uint8_t> bytes);

void write_field(const std::string& path, const AnyField& field);
AnyField read_field(const std::string& path);

// Returns the field narrowed to f32 precision and widened back, i.e. exactly
// what a write/read round trip produces.
AnyField narrow_to_f32(const AnyField& field);

}  // namespace sks

#endif  // SKETCHSMOKE_FIELDS_HPP_
