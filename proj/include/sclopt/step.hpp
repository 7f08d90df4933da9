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

#include "sclopt/aux_functions.hpp"
#include "sclopt/core.hpp"
#include "sclopt/metric.hpp"

#include <algorithm>
#include <cmath>

namespace sclopt {

/// Below this r the analytic step switches to its r -> 0 limit.
inline constexpr double kStepSeriesRadius = 1e-9;

/// lambda = ||d||_x (local norm), r = M_f ||d||_2, beta = ||d||_H.
struct StepQuantities {
  double lambda = 0.0;
  double r = 0.0;
  double beta = 0.0;
};

struct StepResult {
  double alpha = 0.0;
  bool condition_holds = false;     ///< beta^2 r <= (e^r - 1) lambda^2
  double predicted_decrease = 0.0;  ///< guaranteed decrease of F at alpha
};

/// ||d||_x = <hess f(x) d, d>^{1/2} from a single Hessian-vector product.
/// Curvature down to -1e-10 ||d||^2 is rounding and clamps to zero.
inline double local_norm(const SmoothOracle& oracle, const Vector& x, const Vector& d) {
  if (d.squaredNorm() == 0.0) return 0.0;
  const double q = d.dot(oracle.hess_vec(x, d));
  detail::check_finite(q, "local_norm: <hess f(x) d, d>");
  if (q < 0.0) {
    if (q < -1e-10 * d.squaredNorm())
      throw NonConvexError("local_norm: negative curvature " + std::to_string(q) + " along d");
    return 0.0;
  }
  return std::sqrt(q);
}

inline StepQuantities step_quantities(const Vector& d, const SmoothOracle& oracle, const Vector& x,
                                      const Metric& H) {
  detail::require(d.size() == oracle.dimension(), "step_quantities: dimension mismatch");
  StepQuantities q;
  q.lambda = local_norm(oracle, x, d);
  q.r = oracle.scl_constant() * d.norm();
  q.beta = H.norm(d);
  return q;
}

/// psi_k(tau) = beta^2 tau - lambda^2 omega(r tau) tau^2: the decrease of F
/// that the self-concordant-like bounds guarantee for step tau along d.
inline double worst_case_decrement(const StepQuantities& q, double tau) {
  return q.beta * q.beta * tau - q.lambda * q.lambda * omega(q.r * tau) * tau * tau;
}

/**
 * alpha = (1/r) ln(1 + beta^2 r / lambda^2), the maximizer of
 * worst_case_decrement; for r <= kStepSeriesRadius the limit
 * alpha = min(1, beta^2 / lambda^2) is used and the condition is taken as
 * satisfied (the step still guarantees worst_case_decrement(alpha) > 0).
 */
inline StepResult analytic_step(const StepQuantities& q) {
  if (!(q.beta > 0.0)) throw DomainError("analytic_step: beta must be positive");
  if (!(q.lambda > 0.0)) throw DomainError("analytic_step: zero curvature along d (lambda = 0, beta > 0)");
  const double b2 = q.beta * q.beta;
  const double l2 = q.lambda * q.lambda;
  StepResult out;
  if (q.r > kStepSeriesRadius) {
    const double t = b2 * q.r / l2;
    out.alpha = std::log1p(t) / q.r;
    out.condition_holds = b2 * q.r <= std::expm1(q.r) * l2;
    // beta^2/r [(1 + 1/t) ln(1 + t) - 1] written as (beta^4 / lambda^2) k(t).
    double k;
    if (t < 1e-3)
      k = 0.5 + t * (-1.0 / 6 + t * (1.0 / 12 - t / 20));
    else
      k = ((1.0 + t) * std::log1p(t) - t) / (t * t);
    out.predicted_decrease = b2 * b2 / l2 * k;
    if (out.condition_holds) out.alpha = std::min(out.alpha, 1.0);
  } else {
    out.alpha = std::min(1.0, b2 / l2);
    out.condition_holds = true;
    out.predicted_decrease = worst_case_decrement(q, out.alpha);
  }
  return out;
}

/// ln(1 + r) / r, the damped proximal-Newton step; 1 in the r -> 0 limit.
inline double damped_newton_step(double r) {
  if (!(r >= 0.0)) throw DomainError("damped_newton_step: r must be nonnegative");
  return r > kStepSeriesRadius ? std::log1p(r) / r : 1.0;
}

/// ||y||^2 / <y, s> when the curvature <y, s> exceeds 1e-12 ||y|| ||s||,
/// otherwise `fallback` (typically the previous estimate).
inline double bb_estimate(const Vector& s, const Vector& y, double fallback = 1.0) {
  detail::require(s.size() == y.size(), "bb_estimate: dimension mismatch");
  const double ys = y.dot(s);
  if (ys > 1e-12 * y.norm() * s.norm() && ys > 0.0) return y.squaredNorm() / ys;
  return fallback;
}

/// psi(tau) = tau ((1 + 1/tau) ln(1 + tau) - 1) = (1 + tau) ln(1 + tau) - tau.
inline double psi_decrement(double tau) {
  if (!(tau >= 0.0)) throw DomainError("psi_decrement: tau must be nonnegative");
  if (tau < 1e-3) return tau * tau * (0.5 + tau * (-1.0 / 6 + tau * (1.0 / 12 - tau / 20)));
  return (1.0 + tau) * std::log1p(tau) - tau;
}

}  // namespace sclopt
