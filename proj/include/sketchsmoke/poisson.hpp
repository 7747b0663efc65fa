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

// Conjugate-gradient solvers for the negated 5-point Laplacian A = -L / dx^2.
//
// Both variants solve A x = b with A symmetric positive (semi-)definite:
//  * solve_dirichlet_node: unknowns are the interior nodes, boundary nodes
//    are held at zero.
//  * solve_neumann_cell: unknowns are all cells, zero normal gradient at the
//    walls. The right-hand side is shifted to zero mean and the solution is
//    returned with zero mean.
//
// Inner products are accumulated sequentially in storage order, so results
// are bit-reproducible for a given input.

#ifndef SKETCHSMOKE_POISSON_HPP_
#define SKETCHSMOKE_POISSON_HPP_

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sketchsmoke/fields.hpp"

namespace sks {

struct SolveStats {
  int iterations = 0;
  double final_residual = 0.0;  // ||b - A x||_2 / ||b||_2
  bool converged = true;
  // Relative residual of the best iterate after each iteration; entry 0 is
  // the initial guess. Non-increasing.
  std::vector<double> residual_history;
};

struct SolveOptions {
  double tol = 1e-10;
  // <= 0 selects the default of 10 * nx * ny.
  int max_iterations = 0;
  bool jacobi_preconditioner = false;
};

// y = A x for a symmetric positive (semi-)definite A.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

/// Preconditioned CG on A x = b starting from the contents of `x`. An empty
/// `inv_diag` disables preconditioning. With `singular` set, residuals are
/// projected off the constant vector (consistent pure-Neumann systems).
/// Returns the iterate with the smallest residual seen.
SolveStats conjugate_gradient(const LinearOperator& apply, std::span<const double> b,
                              std::vector<double>& x, std::span<const double> inv_diag,
                              double tol, int max_iterations, bool singular = false);

std::pair<ScalarField, SolveStats> solve_dirichlet_node(
    const ScalarField& rhs, const SolveOptions& options = {},
    const ScalarField* initial_guess = nullptr);

std::pair<ScalarField, SolveStats> solve_neumann_cell(
    const ScalarField& rhs, const SolveOptions& options = {},
    const ScalarField* initial_guess = nullptr);

// A x for the two operators; boundary nodes of the Dirichlet result are zero.
ScalarField apply_dirichlet_operator(const ScalarField& x);
ScalarField apply_neumann_operator(const ScalarField& x);

}  // namespace sks

#endif  // SKETCHSMOKE_POISSON_HPP_
