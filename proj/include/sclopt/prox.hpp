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
#include "sclopt/metric.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace sclopt {

// ---------------------------------------------------------------------------
// Closed-form proxes
// ---------------------------------------------------------------------------

/// z_i = sign(u_i) max(|u_i| - rho / D_i, 0). Ties go to exactly 0.
inline Vector soft_threshold_diag(const Vector& u, const Vector& D, double rho) {
  detail::require(u.size() == D.size(), "soft_threshold_diag: dimension mismatch");
  detail::require((D.array() > 0.0).all(), "soft_threshold_diag: D must be positive");
  detail::require(rho >= 0.0, "soft_threshold_diag: rho must be nonnegative");
  Vector z(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double mag = std::abs(u[i]) - rho / D[i];
    z[i] = mag > 0.0 ? std::copysign(mag, u[i]) : 0.0;
  }
  return z;
}

/// Componentwise clamp to [lo, hi]; the minimizer of 1/2 ||z - u||_D^2 over
/// the box for every positive diagonal D.
inline Vector box_clip(const Vector& u, const Vector& lo, const Vector& hi) {
  detail::require(u.size() == lo.size() && u.size() == hi.size(), "box_clip: dimension mismatch");
  detail::require((lo.array() <= hi.array()).all(), "box_clip: infeasible box (lo > hi)");
  return u.cwiseMax(lo).cwiseMin(hi);
}

// ---------------------------------------------------------------------------
// Nonsmooth terms
// ---------------------------------------------------------------------------

class ZeroTerm final : public NonsmoothTerm {
 public:
  double value(const Vector&) const override { return 0.0; }
  Vector prox_diag(const Vector& u, const Vector&) const override { return u; }
  double subgradient_residual(const Vector&, const Vector& v) const override { return v.norm(); }
  std::optional<ActiveSet> active_set(const Vector& x) const override {
    return ActiveSet{std::vector<bool>(static_cast<std::size_t>(x.size()), false), Vector::Zero(x.size())};
  }
  bool is_zero() const override { return true; }
  std::string name() const override { return "zero"; }
};

/// g(x) = sum_i rho_i |x_i| with rho_i >= 0 (rho_i = 0 leaves x_i unpenalized).
class L1Norm final : public NonsmoothTerm {
 public:
  L1Norm(Index n, double rho) : weights_(Vector::Constant(n, rho)) { validate(); }
  explicit L1Norm(Vector weights) : weights_(std::move(weights)) { validate(); }

  const Vector& weights() const noexcept { return weights_; }

  double value(const Vector& x) const override {
    detail::require(x.size() == weights_.size(), "l1: dimension mismatch");
    return weights_.dot(x.cwiseAbs());
  }

  Vector prox_diag(const Vector& u, const Vector& D) const override {
    detail::require(u.size() == weights_.size() && D.size() == weights_.size(), "l1 prox: dimension mismatch");
    Vector z(u.size());
    for (Index i = 0; i < u.size(); ++i) {
      const double mag = std::abs(u[i]) - weights_[i] / D[i];
      z[i] = mag > 0.0 ? std::copysign(mag, u[i]) : 0.0;
    }
    return z;
  }

  double subgradient_residual(const Vector& x, const Vector& v) const override {
    double sq = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double w = -v[i];
      double dist;
      if (x[i] > 0.0)
        dist = w - weights_[i];
      else if (x[i] < 0.0)
        dist = w + weights_[i];
      else
        dist = std::max(std::abs(w) - weights_[i], 0.0);
      sq += dist * dist;
    }
    return std::sqrt(sq);
  }

  std::optional<ActiveSet> active_set(const Vector& x) const override {
    ActiveSet a{std::vector<bool>(static_cast<std::size_t>(x.size())), Vector::Zero(x.size())};
    for (Index i = 0; i < x.size(); ++i) {
      const bool penalized = weights_[i] > 0.0;
      a.fixed[static_cast<std::size_t>(i)] = penalized && x[i] == 0.0;
      if (penalized && x[i] != 0.0) a.smooth_subgradient[i] = std::copysign(weights_[i], x[i]);
    }
    return a;
  }

  std::string name() const override { return "l1"; }

 private:
  void validate() const {
    detail::require(weights_.size() > 0, "l1: empty weight vector");
    detail::require((weights_.array() >= 0.0).all() && weights_.allFinite(), "l1: weights must be nonnegative");
  }

  Vector weights_;
};

/// Indicator of the box [lo, hi].
class BoxIndicator final : public NonsmoothTerm {
 public:
  BoxIndicator(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    detail::require(lo_.size() == hi_.size() && lo_.size() > 0, "box: dimension mismatch");
    detail::require((lo_.array() <= hi_.array()).all(), "box: infeasible box (lo > hi)");
  }

  double value(const Vector& x) const override {
    const bool inside = (x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all();
    return inside ? 0.0 : std::numeric_limits<double>::infinity();
  }

  Vector prox_diag(const Vector& u, const Vector&) const override { return box_clip(u, lo_, hi_); }

  double subgradient_residual(const Vector& x, const Vector& v) const override {
    double sq = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] < lo_[i] || x[i] > hi_[i]) return std::numeric_limits<double>::infinity();
      const double w = -v[i];
      double dist;
      if (lo_[i] == hi_[i])
        dist = 0.0;
      else if (x[i] == lo_[i])
        dist = std::max(w, 0.0);
      else if (x[i] == hi_[i])
        dist = std::max(-w, 0.0);
      else
        dist = w;
      sq += dist * dist;
    }
    return std::sqrt(sq);
  }

  std::optional<ActiveSet> active_set(const Vector& x) const override {
    ActiveSet a{std::vector<bool>(static_cast<std::size_t>(x.size())), Vector::Zero(x.size())};
    for (Index i = 0; i < x.size(); ++i) a.fixed[static_cast<std::size_t>(i)] = x[i] == lo_[i] || x[i] == hi_[i];
    return a;
  }

  const Vector& lower() const noexcept { return lo_; }
  const Vector& upper() const noexcept { return hi_; }
  std::string name() const override { return "box"; }

 private:
  Vector lo_;
  Vector hi_;
};

// ---------------------------------------------------------------------------
// Scaled prox and the quadratic-model subproblem
// ---------------------------------------------------------------------------

struct ProxResult {
  Vector z;
  double residual = 0.0;  ///< subgradient_residual(z, Hz - u)
  int iterations = 0;
  std::size_t prox_calls = 0;
};

struct ProxOptions {
  /// 0 selects the default cap 10 n + 500.
  int max_iterations = 0;
  /// Try an active-set linear solve once the support has settled.
  bool polish = true;
};

namespace detail {

// Solve the model restricted to the free coordinates of the active set at z.
// Returns nullopt when the structure is unavailable or the reduced system
// is singular.
inline std::optional<Vector> polish_active_set(const NonsmoothTerm& g, const Matrix& H, const Vector& u,
                                               const Vector& z) {
  const auto active = g.active_set(z);
  if (!active) return std::nullopt;
  std::vector<Index> free_idx;
  for (Index i = 0; i < z.size(); ++i)
    if (!active->fixed[static_cast<std::size_t>(i)]) free_idx.push_back(i);
  Vector out = z;
  if (free_idx.empty()) return out;
  const auto nf = static_cast<Index>(free_idx.size());
  Matrix Hff(nf, nf);
  Vector rhs(nf);
  const Vector Hfixed = H * [&] {
    Vector zf = z;
    for (Index i : free_idx) zf[i] = 0.0;
    return zf;
  }();
  for (Index a = 0; a < nf; ++a) {
    rhs[a] = u[free_idx[a]] - active->smooth_subgradient[free_idx[a]] - Hfixed[free_idx[a]];
    for (Index b = 0; b < nf; ++b) Hff(a, b) = H(free_idx[a], free_idx[b]);
  }
  Eigen::LLT<Matrix> llt(Hff);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Vector zf = llt.solve(rhs);
  for (Index a = 0; a < nf; ++a) out[free_idx[a]] = zf[a];
  return out;
}

}  // namespace detail

/**
 * P_H^g(u) = argmin_z { g(z) + 1/2 <Hz, z> - <u, z> }, i.e. the prox of g in
 * the H-weighted norm applied to H^{-1} u.
 *
 * Diagonal metrics and g = 0 are solved in closed form. Otherwise the model
 * is minimized by accelerated proximal gradient with step 1/sigma_max(H) and
 * gradient-based restarts, stopping when the optimality residual
 * dist(u - Hz, dg(z)) drops to `tol`. When g exposes an active set, the
 * reduced linear system is solved once the support settles.
 */
inline ProxResult scaled_prox(const NonsmoothTerm& g, const Metric& H, const Vector& u, double tol,
                              const std::optional<Vector>& warm_start = std::nullopt,
                              const ProxOptions& opts = {}) {
  detail::require(tol > 0.0, "scaled_prox: tolerance must be positive");
  detail::require(u.size() == H.dimension(), "scaled_prox: dimension mismatch");
  const Index n = u.size();
  ProxResult out;

  if (H.is_diagonal()) {
    const Vector D = H.diagonal_entries();
    out.z = g.prox_diag(u.cwiseQuotient(D), D);
    out.prox_calls = 1;
    out.residual = g.subgradient_residual(out.z, H.apply(out.z) - u);
    return out;
  }
  if (g.is_zero()) {
    out.z = H.solve(u);
    out.residual = (H.apply(out.z) - u).norm();
    return out;
  }

  const double L = 1.02 * H.max_eigenvalue();
  detail::require(L > 0.0 && std::isfinite(L), "scaled_prox: metric has no positive spectrum");
  const Vector Ldiag = Vector::Constant(n, L);
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * n + 500);

  std::optional<Matrix> dense;
  auto dense_metric = [&]() -> const Matrix& {
    if (!dense) dense = H.to_dense();
    return *dense;
  };
  std::optional<std::vector<bool>> last_pattern, tried_pattern;
  int stable_count = 0;

  Vector z;
  if (warm_start && std::isfinite(g.value(*warm_start))) {
    z = *warm_start;
  } else {
    z = g.prox_diag(warm_start ? *warm_start : Vector(u / L), Ldiag);
    out.prox_calls = 1;
  }
  Vector Hz = H.apply(z);
  double best = g.subgradient_residual(z, Hz - u);
  Vector best_z = z;
  if (best <= tol) {
    out.z = z;
    out.residual = best;
    return out;
  }

  Vector z_prev = z, Hz_prev = Hz;
  double t = 1.0;
  for (int it = 1; it <= cap; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    const Vector y = z + momentum * (z - z_prev);
    const Vector Hy = Hz + momentum * (Hz - Hz_prev);
    Vector z_new = g.prox_diag(y - (Hy - u) / L, Ldiag);
    ++out.prox_calls;
    z_prev = std::move(z);
    Hz_prev = std::move(Hz);
    z = std::move(z_new);
    Hz = H.apply(z);
    t = t_next;
    if ((y - z).dot(z - z_prev) > 0.0) t = 1.0;

    double res = g.subgradient_residual(z, Hz - u);
    out.iterations = it;
    if (res < best) {
      best = res;
      best_z = z;
    }
    if (res <= tol) {
      out.z = std::move(z);
      out.residual = res;
      return out;
    }

    if (opts.polish) {
      const auto active = g.active_set(z);
      if (active) {
        stable_count = (last_pattern && *last_pattern == active->fixed) ? stable_count + 1 : 0;
        last_pattern = active->fixed;
        if (stable_count >= 3 && (!tried_pattern || *tried_pattern != active->fixed)) {
          tried_pattern = active->fixed;
          if (auto cand = detail::polish_active_set(g, dense_metric(), u, z)) {
            const Vector Hc = H.apply(*cand);
            const double cres = g.subgradient_residual(*cand, Hc - u);
            if (cres <= tol) {
              out.z = std::move(*cand);
              out.residual = cres;
              return out;
            }
          }
        }
      }
    }
  }
  throw NonConvergence("scaled_prox: inner solver reached its iteration cap", best);
}

struct SubproblemResult {
  Vector s;
  Vector d;
  double residual = 0.0;  ///< inner optimality residual
  int inner_iterations = 0;
  std::size_t prox_calls = 0;
};

/**
 * s = argmin_z { <grad f(x), z - x> + 1/2 <H(z - x), z - x> + g(z) },
 * d = s - x. For diagonal H this is the closed-form prox of x - H^{-1} grad f(x).
 */
inline SubproblemResult solve_subproblem(const ProblemInstance& p, const Vector& x, const Vector& grad,
                                         const Metric& H, double tol, const ProxOptions& opts = {}) {
  detail::require(x.size() == p.dimension() && grad.size() == p.dimension() && H.dimension() == p.dimension(),
                  "solve_subproblem: dimension mismatch");
  const Vector u = H.apply(x) - grad;
  ProxResult pr = scaled_prox(p.nonsmooth(), H, u, tol, x, opts);
  SubproblemResult out;
  out.d = pr.z - x;
  out.s = std::move(pr.z);
  out.residual = pr.residual;
  out.inner_iterations = pr.iterations;
  out.prox_calls = pr.prox_calls;
  return out;
}

inline SubproblemResult solve_subproblem(const ProblemInstance& p, const Vector& x, const Metric& H, double tol,
                                         const ProxOptions& opts = {}) {
  return solve_subproblem(p, x, p.oracle().gradient(x), H, tol, opts);
}

/// ||x - prox_{H,g}(x - H^{-1} grad f(x))||_2; zero exactly at solutions.
inline double fixed_point_residual(const ProblemInstance& p, const Vector& x, const Metric& metric,
                                   double tol = 1e-13) {
  return solve_subproblem(p, x, metric, tol).d.norm();
}

/// Inner tolerance for dense-metric subproblems:
/// max(min(cap, factor * lambda_prev^power, relative * r0 * min(1, r0)), floor_fraction * eps),
/// where r0 = dist(-grad f(x), dg(x)) is the residual of the warm start z = x.
/// Without the r0 cap a loose first tolerance accepts d = 0, and since r0
/// tracks the current decrement its square keeps the Newton tail quadratic.
struct InnerTolerancePolicy {
  double cap = 0.1;
  double factor = 0.1;
  double power = 2.0;
  double relative = 0.1;
  double floor_fraction = 0.01;

  double operator()(std::optional<double> previous_lambda, double eps,
                    std::optional<double> start_residual = std::nullopt) const {
    double tol = cap;
    if (previous_lambda) tol = std::min(tol, factor * std::pow(*previous_lambda, power));
    if (start_residual) tol = std::min(tol, relative * *start_residual * std::min(1.0, *start_residual));
    return std::max(tol, floor_fraction * eps);
  }
};

}  // namespace sclopt
