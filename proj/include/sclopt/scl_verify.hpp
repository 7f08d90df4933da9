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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>

namespace sclopt {

struct SclCheckReport {
  int samples = 0;
  int violations = 0;
  int skipped = 0;  ///< samples with non-finite stencil values
  /// Most negative slack (rhs - lhs) seen over all inequalities; +inf if none.
  double worst_margin = std::numeric_limits<double>::infinity();
  /// Largest tolerance applied to any single inequality.
  double tolerance = 0.0;

  SclCheckReport& merge(const SclCheckReport& o) {
    samples += o.samples;
    violations += o.violations;
    skipped += o.skipped;
    worst_margin = std::min(worst_margin, o.worst_margin);
    tolerance = std::max(tolerance, o.tolerance);
    return *this;
  }

  bool clean() const noexcept { return violations == 0; }
};

namespace detail {

// Tracks lhs <= rhs + tol for every inequality of one sample.
class SampleCheck {
 public:
  void le(double lhs, double rhs, double tol) {
    margin_ = std::min(margin_, rhs - lhs);
    tol_ = std::max(tol_, tol);
    if (!(lhs <= rhs + tol)) ok_ = false;
  }
  void into(SclCheckReport& rep) const {
    ++rep.samples;
    if (!ok_) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, margin_);
    rep.tolerance = std::max(rep.tolerance, tol_);
  }

 private:
  bool ok_ = true;
  double margin_ = std::numeric_limits<double>::infinity();
  double tol_ = 0.0;
};

struct LineDerivatives {
  double second = 0.0;
  double third = 0.0;
  bool finite = true;
};

// phi(t) = f(x + t u). phi'' comes from Hessian-vector products and phi'''
// from the fourth-order central difference of phi'' with
// h = eps^{1/5} (1 + ||x||) / ||u||.
inline LineDerivatives line_derivatives(const SmoothOracle& f, const Vector& x, const Vector& u) {
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.2) * (1.0 + x.norm()) / u.norm();
  // Oracles that guard against overflow throw; that counts as a non-finite value.
  auto phi2 = [&](double t) {
    const Vector y = x + t * u;
    try {
      return u.dot(f.hess_vec(y, u));
    } catch (const NonFiniteValue&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  LineDerivatives out;
  const double c0 = phi2(0.0);
  const double p1 = phi2(h), m1 = phi2(-h), p2 = phi2(2 * h), m2 = phi2(-2 * h);
  out.finite = std::isfinite(c0) && std::isfinite(p1) && std::isfinite(m1) && std::isfinite(p2) &&
               std::isfinite(m2);
  out.second = c0;
  out.third = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
  // Each stencil value carries about one ulp of rounding, which the weights
  // amplify by 1.5 / h. Anything within a few times that is not a derivative.
  const double scale = std::max({std::abs(c0), std::abs(p1), std::abs(m1), std::abs(p2), std::abs(m2)});
  if (std::abs(out.third) <= 4.0 * 1.5 * std::numeric_limits<double>::epsilon() * scale / h) out.third = 0.0;
  return out;
}

}  // namespace detail

/// One self-concordant-like sample: |phi'''(0)| <= M_f phi''(0) ||u|| + tol_fd with
/// tol_fd = 1e-4 (1 + |rhs|).
inline SclCheckReport check_definition(const SmoothOracle& f, const Vector& x, const Vector& u) {
  detail::require(x.size() == f.dimension() && u.size() == f.dimension(), "check_definition: dimension mismatch");
  detail::require(u.norm() > 0.0, "check_definition: direction must be nonzero");
  SclCheckReport rep;
  const auto der = detail::line_derivatives(f, x, u);
  if (!der.finite) {
    ++rep.skipped;
    return rep;
  }
  const double rhs = f.scl_constant() * der.second * u.norm();
  detail::SampleCheck c;
  c.le(std::abs(der.third), rhs, 1e-4 * (1.0 + std::abs(rhs)));
  c.into(rep);
  return rep;
}

/**
 * Integrated self-concordant-like bounds between x and y with r = M_f ||y - x|| and
 * lambda = ||y - x||_x:
 *   a) e^{-r/2} lambda <= ||y - x||_y <= e^{r/2} lambda
 *   b) e^{-r} <H(x)v, v> <= <H(y)v, v> <= e^r <H(x)v, v> for v in {y - x} and `directions` random v
 *   c) gamma*(r) lambda^2 <= <grad f(y) - grad f(x), y - x> <= gamma(r) lambda^2
 *   d) omega*(r) lambda^2 <= f(y) - f(x) - <grad f(x), y - x> <= omega(r) lambda^2
 * Each inequality is allowed slack * (1 + max(|lhs|, |rhs|)).
 */
inline SclCheckReport check_theorem5_bounds(const SmoothOracle& f, const Vector& x, const Vector& y,
                                            double slack = 1e-8, int directions = 4, std::uint64_t seed = 7) {
  detail::require(x.size() == f.dimension() && y.size() == f.dimension(), "check_theorem5_bounds: dimension mismatch");
  SclCheckReport rep;
  const Vector d = y - x;
  const double r = f.scl_constant() * d.norm();
  double fx, fy, qx, qy;
  Vector gx, gy;
  try {
    fx = f.value(x);
    fy = f.value(y);
    gx = f.gradient(x);
    gy = f.gradient(y);
    qx = d.dot(f.hess_vec(x, d));
    qy = d.dot(f.hess_vec(y, d));
  } catch (const NonFiniteValue&) {
    ++rep.skipped;
    return rep;
  }
  if (!std::isfinite(fx) || !std::isfinite(fy) || !gx.allFinite() || !gy.allFinite() || !std::isfinite(qx) ||
      !std::isfinite(qy)) {
    ++rep.skipped;
    return rep;
  }
  detail::SampleCheck c;
  auto le = [&](double lhs, double rhs) { c.le(lhs, rhs, slack * (1.0 + std::max(std::abs(lhs), std::abs(rhs)))); };

  const double lam2 = std::max(qx, 0.0);
  const double lam = std::sqrt(lam2), lam_y = std::sqrt(std::max(qy, 0.0));
  le(std::exp(-r / 2) * lam, lam_y);
  le(lam_y, std::exp(r / 2) * lam);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i <= directions; ++i) {
    Vector v = d;
    if (i > 0 || d.norm() == 0.0) {
      for (Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
    }
    const double hx = v.dot(f.hess_vec(x, v)), hy = v.dot(f.hess_vec(y, v));
    le(std::exp(-r) * hx, hy);
    le(hy, std::exp(r) * hx);
  }

  const AuxValues aux = aux_functions(r);
  const double grad_gap = (gy - gx).dot(d);
  le(aux.gamma_star * lam2, grad_gap);
  le(grad_gap, aux.gamma * lam2);
  const double bregman = fy - fx - gx.dot(d);
  le(aux.omega_star * lam2, bregman);
  le(bregman, aux.omega * lam2);

  c.into(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline Vector sample_sphere(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (;;) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    const double nv = v.norm();
    if (nv > 0.0) return v / nv;
  }
}

/// Uniform in the ball of the given radius around `center`.
inline Vector sample_ball(const Vector& center, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double rho = radius * std::pow(unif(rng), 1.0 / static_cast<double>(center.size()));
  return center + rho * sample_sphere(center.size(), rng);
}

struct SclSampling {
  int samples = 500;
  std::uint64_t seed = 20260;
  double radius = 2.0;  ///< x is drawn from the ball around the anchor
  double max_step = 1.0;  ///< ||y - x|| for the pair checks
  std::optional<Vector> anchor;  ///< defaults to 0
};

struct SclSuiteReport {
  SclCheckReport definition;
  SclCheckReport pair_bounds;
  bool clean() const noexcept { return definition.clean() && pair_bounds.clean(); }
};

inline SclSuiteReport verify_scl(const SmoothOracle& f, const SclSampling& s = {}, double slack = 1e-8) {
  detail::require(s.samples >= 1, "verify_scl: need at least one sample");
  const Vector anchor = s.anchor ? *s.anchor : Vector::Zero(f.dimension());
  detail::require(anchor.size() == f.dimension(), "verify_scl: anchor dimension mismatch");
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SclSuiteReport out;
  for (int i = 0; i < s.samples; ++i) {
    const Vector x = sample_ball(anchor, s.radius, rng);
    const Vector u = sample_sphere(f.dimension(), rng);
    out.definition.merge(check_definition(f, x, u));
    const Vector y = x + s.max_step * unif(rng) * sample_sphere(f.dimension(), rng);
    out.pair_bounds.merge(check_theorem5_bounds(f, x, y, slack, 4, s.seed + static_cast<std::uint64_t>(i)));
  }
  return out;
}

/**
 * Empirical lower bound on the self-concordant-like constant: the largest
 * |phi'''| / (phi'' ||u||) over sampled (x, u) with phi'' > 1e-12.
 * Throws DomainError when every sample is degenerate.
 */
inline double estimate_Mf(const SmoothOracle& f, int sample_count, const SclSampling& s = {}) {
  detail::require(sample_count >= 1, "estimate_Mf: sample_count must be positive");
  const Vector anchor = s.anchor ? *s.anchor : Vector::Zero(f.dimension());
  std::mt19937_64 rng(s.seed);
  double best = 0.0;
  int used = 0;
  for (int i = 0; i < sample_count; ++i) {
    const Vector x = sample_ball(anchor, s.radius, rng);
    const Vector u = sample_sphere(f.dimension(), rng);
    const auto der = detail::line_derivatives(f, x, u);
    if (!der.finite || !(der.second > 1e-12)) continue;
    ++used;
    best = std::max(best, std::abs(der.third) / (der.second * u.norm()));
  }
  if (used == 0) throw DomainError("estimate_Mf: insufficient curvature at every sample");
  return best;
}

}  // namespace sclopt
