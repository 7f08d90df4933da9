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

#pragma once

#include "sclopt/core.hpp"

#include <cmath>

namespace sclopt {

/// The four scalar functions bounding self-concordant-like behaviour:
///   omega(t)      = (e^t - t - 1) / t^2       omega_star(t) = (e^-t + t - 1) / t^2
///   gamma(t)      = (e^t - 1) / t             gamma_star(t) = (1 - e^-t) / t
/// omega and omega_star tend to 1/2, gamma and gamma_star to 1, as t -> 0.
struct AuxValues {
  double omega = 0.5;
  double omega_star = 0.5;
  double gamma = 1.0;
  double gamma_star = 1.0;
};

namespace detail {
// Below this the closed forms lose digits to cancellation; the truncated
// Taylor series has error below t^5 / 120.
inline constexpr double kAuxSeriesCutoff = 1e-3;
}  // namespace detail

inline AuxValues aux_functions(double tau) {
  if (!(tau >= 0.0)) throw DomainError("aux_functions: tau must be nonnegative");
  AuxValues a;
  const double t = tau;
  if (t < detail::kAuxSeriesCutoff) {
    a.omega = 0.5 + t * (1.0 / 6 + t * (1.0 / 24 + t * (1.0 / 120 + t / 720)));
    a.omega_star = 0.5 + t * (-1.0 / 6 + t * (1.0 / 24 + t * (-1.0 / 120 + t / 720)));
    a.gamma = 1.0 + t * (0.5 + t * (1.0 / 6 + t * (1.0 / 24 + t / 120)));
    a.gamma_star = 1.0 + t * (-0.5 + t * (1.0 / 6 + t * (-1.0 / 24 + t / 120)));
    return a;
  }
  const double em = std::expm1(t);
  const double emn = std::expm1(-t);
  a.omega = (em - t) / (t * t);
  a.omega_star = (emn + t) / (t * t);
  a.gamma = em / t;
  a.gamma_star = -emn / t;
  return a;
}

inline double omega(double tau) { return aux_functions(tau).omega; }

}  // namespace sclopt
