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

#include "sketchsmoke/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "sketchsmoke/error.hpp"

namespace sks {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void remove_mean(std::span<double> a) {
  if (a.empty()) return;
  double s = 0.0;
  for (double v : a) s += v;
  const double mean = s / static_cast<double>(a.size());
  for (double& v : a) v -= mean;
}

// 5-point operator on an m x n block with Dirichlet zeros outside.
void dirichlet_apply(std::span<const double> x, std::span<double> y, int m, int n,
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

// 5-point operator on an m x n block with zero normal gradient at the walls.
void neumann_apply(std::span<const double> x, std::span<double> y, int m, int n,
                   double inv_h2) {
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * m + i;
      const double c = x[k];
      double s = 0.0;
      if (i > 0) s += c - x[k - 1];
      if (i + 1 < m) s += c - x[k + 1];
      if (j > 0) s += c - x[k - m];
      if (j + 1 < n) s += c - x[k + m];
      y[k] = s * inv_h2;
    }
  }
}

}  // namespace

SolveStats conjugate_gradient(const LinearOperator& apply, std::span<const double> b,
                              std::vector<double>& x, std::span<const double> inv_diag,
                              double tol, int max_iterations, bool singular) {
  SolveStats stats;
  const std::size_t n = b.size();
  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.residual_history.push_back(0.0);
    return stats;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(std::span<const double>(x), std::span<double>(ap));
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
  if (singular) remove_mean(r);

  auto precondition = [&]() {
    if (inv_diag.empty()) {
      std::copy(r.begin(), r.end(), z.begin());
    } else {
      for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    }
  };

  double rel = norm2(r) / b_norm;
  double best = rel;
  std::vector<double> best_x = x;
  stats.residual_history.push_back(best);

  precondition();
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (rel > tol && it < max_iterations) {
    apply(std::span<const double>(p), std::span<double>(ap));
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;  // breakdown: direction in the null space
    const double alpha = rz / pap;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    if (singular) remove_mean(r);
    ++it;
    rel = norm2(r) / b_norm;
    if (rel < best) {
      best = rel;
      best_x = x;
    }
    stats.residual_history.push_back(best);

    precondition();
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  x = std::move(best_x);

  // Report the true residual of the returned iterate.
  apply(std::span<const double>(x), std::span<double>(ap));
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
  if (singular) remove_mean(r);
  stats.iterations = it;
  stats.final_residual = norm2(r) / b_norm;
  stats.converged = stats.final_residual <= tol;
  return stats;
}

namespace {

int default_max_iterations(const Grid& g, const SolveOptions& options) {
  return options.max_iterations > 0 ? options.max_iterations : 10 * g.nx * g.ny;
}

void check_rhs(const ScalarField& rhs, Siting expected, double tol) {
  if (rhs.siting() != expected) {
    throw Error(ErrorCode::kShape, expected == Siting::kNode
                                       ? "dirichlet solve expects a node field"
                                       : "neumann solve expects a cell field");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "solver tolerance must be positive");
  for (double v : rhs.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite right-hand side");
  }
}

}  // namespace

std::pair<ScalarField, SolveStats> solve_dirichlet_node(const ScalarField& rhs,
                                                        const SolveOptions& options,
                                                        const ScalarField* initial_guess) {
  check_rhs(rhs, Siting::kNode, options.tol);
  const Grid& g = rhs.grid();
  const int m = g.nx - 1;
  const int n = g.ny - 1;
  const double inv_h2 = 1.0 / (g.dx * g.dx);

  std::vector<double> b(static_cast<std::size_t>(m) * n);
  std::vector<double> x(b.size(), 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      b[static_cast<std::size_t>(j) * m + i] = rhs.at(i + 1, j + 1);
      if (initial_guess != nullptr) {
        x[static_cast<std::size_t>(j) * m + i] = initial_guess->at(i + 1, j + 1);
      }
    }
  }
  std::vector<double> inv_diag;
  if (options.jacobi_preconditioner) inv_diag.assign(b.size(), 1.0 / (4.0 * inv_h2));

  auto apply = [&](std::span<const double> in, std::span<double> out) {
    dirichlet_apply(in, out, m, n, inv_h2);
  };
  SolveStats stats = conjugate_gradient(apply, b, x, inv_diag, options.tol,
                                        default_max_iterations(g, options), false);

  ScalarField out(g, Siting::kNode);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) out.at(i + 1, j + 1) = x[static_cast<std::size_t>(j) * m + i];
  }
  return {std::move(out), std::move(stats)};
}

std::pair<ScalarField, SolveStats> solve_neumann_cell(const ScalarField& rhs,
                                                      const SolveOptions& options,
                                                      const ScalarField* initial_guess) {
  check_rhs(rhs, Siting::kCell, options.tol);
  const Grid& g = rhs.grid();
  const int m = g.nx;
  const int n = g.ny;
  const double inv_h2 = 1.0 / (g.dx * g.dx);

  std::vector<double> b(rhs.data().begin(), rhs.data().end());
  remove_mean(b);
  std::vector<double> x(b.size(), 0.0);
  if (initial_guess != nullptr) {
    std::copy(initial_guess->data().begin(), initial_guess->data().end(), x.begin());
  }
  std::vector<double> inv_diag;
  if (options.jacobi_preconditioner) {
    inv_diag.resize(b.size());
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) {
        const int neighbours = (i > 0) + (i + 1 < m) + (j > 0) + (j + 1 < n);
        inv_diag[static_cast<std::size_t>(j) * m + i] = 1.0 / (neighbours * inv_h2);
      }
    }
  }

  auto apply = [&](std::span<const double> in, std::span<double> out) {
    neumann_apply(in, out, m, n, inv_h2);
  };
  SolveStats stats = conjugate_gradient(apply, b, x, inv_diag, options.tol,
                                        default_max_iterations(g, options), true);
  remove_mean(x);
  return {ScalarField(g, Siting::kCell, std::move(x)), std::move(stats)};
}

ScalarField apply_dirichlet_operator(const ScalarField& x) {
  if (x.siting() != Siting::kNode) throw Error(ErrorCode::kShape, "expected a node field");
  const Grid& g = x.grid();
  const int m = g.nx - 1;
  const int n = g.ny - 1;
  std::vector<double> in(static_cast<std::size_t>(m) * n), out(in.size());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) in[static_cast<std::size_t>(j) * m + i] = x.at(i + 1, j + 1);
  }
  dirichlet_apply(in, out, m, n, 1.0 / (g.dx * g.dx));
  ScalarField y(g, Siting::kNode);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) y.at(i + 1, j + 1) = out[static_cast<std::size_t>(j) * m + i];
  }
  return y;
}

ScalarField apply_neumann_operator(const ScalarField& x) {
  if (x.siting() != Siting::kCell) throw Error(ErrorCode::kShape, "expected a cell field");
  const Grid& g = x.grid();
  ScalarField y(g, Siting::kCell);
  neumann_apply(x.data(), y.data(), g.nx, g.ny, 1.0 / (g.dx * g.dx));
  return y;
}

}  // namespace sks
