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

#include "sketchsmoke/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "sketchsmoke/error.hpp"

namespace sks {

void Grid::validate() const {
  if (nx < 2 || ny < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid needs at least 2x2 cells, got " + std::to_string(nx) +
                    "x" + std::to_string(ny));
  }
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw Error(ErrorCode::kInvalidArgument, "grid spacing must be positive");
  }
}

Grid Grid::unit(int nx, int ny) {
  Grid g{nx, ny, nx > 0 ? 1.0 / nx : 0.0};
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Containers
// ---------------------------------------------------------------------------

ScalarField::ScalarField(const Grid& grid, Siting siting)
    : grid_(grid), siting_(siting) {
  grid_.validate();
  data_.assign(static_cast<std::size_t>(sites_x()) * sites_y(), 0.0);
}

ScalarField::ScalarField(const Grid& grid, Siting siting, std::vector<double> data)
    : grid_(grid), siting_(siting), data_(std::move(data)) {
  grid_.validate();
  if (data_.size() != static_cast<std::size_t>(sites_x()) * sites_y()) {
    throw Error(ErrorCode::kShape, "scalar field data length does not match grid");
  }
}

Vec2 ScalarField::site(int i, int j) const {
  const double off = siting_ == Siting::kNode ? 0.0 : 0.5;
  return {(i + off) * grid_.dx, (j + off) * grid_.dx};
}

MacVelocity::MacVelocity(const Grid& grid) : grid_(grid) {
  grid_.validate();
  u_.assign(static_cast<std::size_t>(grid_.nx + 1) * grid_.ny, 0.0);
  v_.assign(static_cast<std::size_t>(grid_.nx) * (grid_.ny + 1), 0.0);
}

MacVelocity::MacVelocity(const Grid& grid, std::vector<double> u, std::vector<double> v)
    : grid_(grid), u_(std::move(u)), v_(std::move(v)) {
  grid_.validate();
  if (u_.size() != static_cast<std::size_t>(grid_.nx + 1) * grid_.ny ||
      v_.size() != static_cast<std::size_t>(grid_.nx) * (grid_.ny + 1)) {
    throw Error(ErrorCode::kShape, "velocity component lengths do not match grid");
  }
}

void MacVelocity::zero_boundary_faces() {
  for (int j = 0; j < grid_.ny; ++j) {
    u(0, j) = 0.0;
    u(grid_.nx, j) = 0.0;
  }
  for (int i = 0; i < grid_.nx; ++i) {
    v(i, 0) = 0.0;
    v(i, grid_.ny) = 0.0;
  }
}

double MacVelocity::max_boundary_normal() const {
  double m = 0.0;
  for (int j = 0; j < grid_.ny; ++j) {
    m = std::max({m, std::abs(u(0, j)), std::abs(u(grid_.nx, j))});
  }
  for (int i = 0; i < grid_.nx; ++i) {
    m = std::max({m, std::abs(v(i, 0)), std::abs(v(i, grid_.ny))});
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

double sample_lattice(std::span<const double> data, int sites_x, int sites_y, double fx,
                      double fy) {
  fx = std::clamp(fx, 0.0, static_cast<double>(sites_x - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(sites_y - 1));
  const int i0 = std::min(static_cast<int>(fx), sites_x - 2);
  const int j0 = std::min(static_cast<int>(fy), sites_y - 2);
  const double tx = fx - i0;
  const double ty = fy - j0;

  const std::size_t row0 = static_cast<std::size_t>(j0) * sites_x;
  const std::size_t row1 = row0 + sites_x;
  const double a = data[row0 + i0];
  const double b = data[row0 + i0 + 1];
  const double c = data[row1 + i0];
  const double d = data[row1 + i0 + 1];

  const double ab = a * (1.0 - tx) + b * tx;
  const double cd = c * (1.0 - tx) + d * tx;
  const double value = ab * (1.0 - ty) + cd * ty;
  const auto [lo, hi] = std::minmax({a, b, c, d});
  return std::clamp(value, lo, hi);
}

}  // namespace detail

namespace {

// Physical-position lookup on a lattice whose site (0, 0) sits at
// (ox * dx, oy * dx).
double sample_lattice(std::span<const double> data, int sites_x, int sites_y,
                      double ox, double oy, double dx, Vec2 pos) {
  if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid position");
  }
  return detail::sample_lattice(data, sites_x, sites_y, pos.x / dx - ox, pos.y / dx - oy);
}

}  // namespace

double sample(const ScalarField& field, Vec2 pos) {
  const double off = field.siting() == Siting::kNode ? 0.0 : 0.5;
  return sample_lattice(field.data(), field.sites_x(), field.sites_y(), off, off,
                        field.grid().dx, pos);
}

double sample_u(const MacVelocity& vel, Vec2 pos) {
  const Grid& g = vel.grid();
  return sample_lattice(vel.u_data(), g.nx + 1, g.ny, 0.0, 0.5, g.dx, pos);
}

double sample_v(const MacVelocity& vel, Vec2 pos) {
  const Grid& g = vel.grid();
  return sample_lattice(vel.v_data(), g.nx, g.ny + 1, 0.5, 0.0, g.dx, pos);
}

Vec2 sample(const MacVelocity& vel, Vec2 pos) {
  return {sample_u(vel, pos), sample_v(vel, pos)};
}

ScalarField divergence(const MacVelocity& vel) {
  const Grid& g = vel.grid();
  ScalarField div(g, Siting::kCell);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      div.at(i, j) = ((vel.u(i + 1, j) - vel.u(i, j)) + (vel.v(i, j + 1) - vel.v(i, j))) / g.dx;
    }
  }
  return div;
}

double max_abs_divergence(const MacVelocity& vel) {
  const ScalarField div = divergence(vel);
  double m = 0.0;
  for (double d : div.data()) m = std::max(m, std::abs(d));
  return m;
}

MacVelocity gradient(const ScalarField& cell_field) {
  const Grid& g = cell_field.grid();
  MacVelocity grad(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      grad.u(i, j) = (cell_field.at(i, j) - cell_field.at(i - 1, j)) / g.dx;
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      grad.v(i, j) = (cell_field.at(i, j) - cell_field.at(i, j - 1)) / g.dx;
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// SFLD
// ---------------------------------------------------------------------------

FieldKind kind_of(const AnyField& field) {
  if (const auto* s = std::get_if<ScalarField>(&field)) {
    return s->siting() == Siting::kNode ? FieldKind::kNodeScalar : FieldKind::kCellScalar;
  }
  return FieldKind::kMac;
}

const Grid& grid_of(const AnyField& field) {
  return std::visit([](const auto& f) -> const Grid& { return f.grid(); }, field);
}

const char* kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::kNodeScalar: return "node scalar";
    case FieldKind::kCellScalar: return "cell scalar";
    case FieldKind::kMac: return "MAC vector";
  }
  return "unknown";
}

namespace {

constexpr char kMagic[4] = {'S', 'F', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    bits |= static_cast<U>(in[offset + k]) << (8 * k);
  }
  return std::bit_cast<T>(bits);
}

void put_payload(std::vector<std::uint8_t>& out, std::span<const double> values) {
  for (double v : values) put_le(out, static_cast<float>(v));
}

std::vector<double> get_payload(std::span<const std::uint8_t> in, std::size_t offset,
                                std::size_t count, std::size_t first_index) {
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    const float f = get_le<float>(in, offset + 4 * k);
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kParse,
                  "non-finite payload value at index " + std::to_string(first_index + k));
    }
    values[k] = f;
  }
  return values;
}

[[noreturn]] void parse_error(const std::string& message) {
  throw Error(ErrorCode::kParse, message);
}

}  // namespace

std::vector<std::uint8_t> encode_field(const AnyField& field) {
  const Grid& g = grid_of(field);
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint8_t>(kind_of(field)));
  out.insert(out.end(), 3, 0);
  put_le(out, static_cast<std::uint32_t>(g.nx));
  put_le(out, static_cast<std::uint32_t>(g.ny));
  put_le(out, g.dx);
  if (const auto* s = std::get_if<ScalarField>(&field)) {
    put_payload(out, s->data());
  } else {
    const auto& m = std::get<MacVelocity>(field);
    put_payload(out, m.u_data());
    put_payload(out, m.v_data());
  }
  return out;
}

AnyField decode_field(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSfldHeaderBytes) {
    parse_error("truncated header: " + std::to_string(bytes.size()) + " bytes");
  }
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    parse_error("bad magic");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kVersion) parse_error("bad version: " + std::to_string(version));
  const auto kind_byte = bytes[8];
  if (kind_byte > 2) parse_error("bad kind: " + std::to_string(kind_byte));
  if (bytes[9] != 0 || bytes[10] != 0 || bytes[11] != 0) parse_error("bad padding");
  const auto nx = get_le<std::uint32_t>(bytes, 12);
  const auto ny = get_le<std::uint32_t>(bytes, 16);
  const auto dx = get_le<double>(bytes, 20);
  constexpr std::uint32_t kMaxCells = 1u << 15;
  if (nx < 2 || nx > kMaxCells) parse_error("bad nx: " + std::to_string(nx));
  if (ny < 2 || ny > kMaxCells) parse_error("bad ny: " + std::to_string(ny));
  if (!(dx > 0.0) || !std::isfinite(dx)) parse_error("bad dx");

  const Grid grid{static_cast<int>(nx), static_cast<int>(ny), dx};
  const auto kind = static_cast<FieldKind>(kind_byte);
  const std::size_t n_u = static_cast<std::size_t>(nx + 1) * ny;
  const std::size_t n_v = static_cast<std::size_t>(nx) * (ny + 1);
  std::size_t count = 0;
  switch (kind) {
    case FieldKind::kNodeScalar: count = static_cast<std::size_t>(nx + 1) * (ny + 1); break;
    case FieldKind::kCellScalar: count = static_cast<std::size_t>(nx) * ny; break;
    case FieldKind::kMac: count = n_u + n_v; break;
  }
  const std::size_t expected = kSfldHeaderBytes + 4 * count;
  if (bytes.size() != expected) {
    parse_error("bad payload length: expected " + std::to_string(expected) +
                " bytes for " + kind_name(kind) + ", got " + std::to_string(bytes.size()));
  }
  if (kind == FieldKind::kMac) {
    auto u = get_payload(bytes, kSfldHeaderBytes, n_u, 0);
    auto v = get_payload(bytes, kSfldHeaderBytes + 4 * n_u, n_v, n_u);
    return MacVelocity(grid, std::move(u), std::move(v));
  }
  const Siting siting = kind == FieldKind::kNodeScalar ? Siting::kNode : Siting::kCell;
  return ScalarField(grid, siting, get_payload(bytes, kSfldHeaderBytes, count, 0));
}

void write_field(const std::string& path, const AnyField& field) {
  const auto bytes = encode_field(field);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

AnyField read_field(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kIo, "file not found: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_field(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

AnyField narrow_to_f32(const AnyField& field) {
  auto narrow = [](std::span<double> values) {
    for (double& v : values) v = static_cast<double>(static_cast<float>(v));
  };
  AnyField copy = field;
  if (auto* s = std::get_if<ScalarField>(&copy)) {
    narrow(s->data());
  } else {
    auto& m = std::get<MacVelocity>(copy);
    narrow(m.u_data());
    narrow(m.v_data());
  }
  return copy;
}

}  // namespace sks
