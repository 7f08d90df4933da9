/*
 * Copyright (c) 2026, the sclopt authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Desk-scale instances shared by the unit and acceptance suites.

#pragma once

#include "sclopt/sclopt.hpp"

namespace sclopt::testing {

/// Logistic regression with rho N^{-1/2} ||x||_1; N = 200, p = 50, rho = 0.1
/// and unit-variance features.
inline ProblemInstance desk_logistic(std::uint64_t seed, Index N = 200, Index p = 50, double rho = 0.1) {
  return logistic_l1_problem(synth_logistic_data(N, p, seed, false, 1.0), rho);
}

/// High-accuracy reference: prox-Newton at eps = 1e-14.
inline SolveResult reference_solve(const ProblemInstance& p, int max_iterations = 200) {
  SolverOptions o;
  o.epsilon = 1e-14;
  o.max_iterations = max_iterations;
  return prox_newton_solve(p, Vector::Zero(p.dimension()), o);
}

}  // namespace sclopt::testing
