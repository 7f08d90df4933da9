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
#include "sclopt/eigs.hpp"
#include "sclopt/metric.hpp"
#include "sclopt/prox.hpp"
#include "sclopt/step.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

namespace sclopt {

struct SolverOptions {
  double epsilon = 1e-8;
  int max_iterations = 10000;
  /// Factor applied to the metric whenever the step condition fails.
  double metric_shrink_factor = 0.5;
  int max_shrinks_per_iteration = 60;
  /// Phase threshold of the proximal-Newton method; estimated when unset.
  std::optional<double> sigma_override;
  InnerTolerancePolicy inner_tol;
  /// L_0 for the scalar metric and B_0 = L_0 I for BFGS.
  double initial_L = 1.0;
  double L_floor = 1e-8;
  double L_ceil = 1e12;
  int sigma_lanczos_iterations = 20;
  /// Store x^k in every trace record (needed by rate_diagnostics).
  bool record_iterates = false;

  void validate() const {
    detail::require(epsilon > 0.0, "SolverOptions: epsilon must be positive");
    detail::require(max_iterations > 0, "SolverOptions: max_iterations must be positive");
    detail::require(metric_shrink_factor > 0.0 && metric_shrink_factor < 1.0,
                    "SolverOptions: metric_shrink_factor must lie in (0, 1)");
    detail::require(max_shrinks_per_iteration > 0, "SolverOptions: max_shrinks_per_iteration must be positive");
    detail::require(!sigma_override || *sigma_override > 0.0, "SolverOptions: sigma must be positive");
    detail::require(initial_L > 0.0, "SolverOptions: initial_L must be positive");
    detail::require(L_floor > 0.0 && L_floor <= L_ceil, "SolverOptions: bad L clamp");
    detail::require(sigma_lanczos_iterations > 0, "SolverOptions: sigma_lanczos_iterations must be positive");
  }
};

struct SolveResult {
  Vector x;
  RunTrace trace;
  bool converged = false;
  int iterations = 0;  ///< accepted steps
  std::size_t prox_calls = 0;
  double final_residual = 0.0;  ///< ||d||_2 at the returned point
  std::optional<Metric> final_metric;
  double sigma = 0.0;  ///< proximal-Newton phase threshold actually used
  double elapsed_seconds = 0.0;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double objective_checked(const ProblemInstance& p, const Vector& x, const char* where) {
  const double F = objective_value(p, x);
  if (!std::isfinite(F)) throw NonFiniteValue(where, F);
  return F;
}

struct PendingRecord {
  TraceRecord rec;
  void finish(RunTrace& trace, const Stopwatch& clock, std::size_t prox_calls, const Vector& x, bool keep_x) {
    rec.elapsed_seconds = clock.seconds();
    rec.prox_call_count = prox_calls;
    if (keep_x) rec.iterate = x;
    trace.records.push_back(std::move(rec));
  }
};

// alpha and the guaranteed decrease for the metric-based methods. A direction
// with no curvature is one along which f is affine on the whole segment, so
// the unit step is safe and decreases F by at least beta^2.
inline StepResult step_for(const StepQuantities& q) {
  if (q.lambda == 0.0) return {1.0, true, q.beta * q.beta};
  return analytic_step(q);
}

}  // namespace detail

/**
 * Proximal gradient with the scalar metric D_k = L_k I.
 *
 * L_k follows the Barzilai-BenTal estimate clamped to [L_floor, L_ceil]. When
 * the analytic step condition fails the iterate is kept and L_k is multiplied
 * by metric_shrink_factor, at most max_shrinks_per_iteration times.
 */
inline SolveResult prox_gradient_solve(const ProblemInstance& p, const Vector& x0, const SolverOptions& opts = {}) {
  opts.validate();
  detail::require(x0.size() == p.dimension(), "prox_gradient_solve: x0 dimension mismatch");
  const detail::Stopwatch clock;
  const Index n = p.dimension();
  const double mf = p.oracle().scl_constant();

  SolveResult out;
  Vector x = x0;
  double F = detail::objective_checked(p, x, "prox_gradient_solve: F(x0)");
  Vector grad = p.oracle().gradient(x);
  double L = std::clamp(opts.initial_L, opts.L_floor, opts.L_ceil);

  for (int k = 0;; ++k) {
    detail::PendingRecord pending;
    pending.rec.k = k;
    pending.rec.F_value = F;

    int shrinks = 0;
    SubproblemResult sub;
    StepQuantities q;
    StepResult step;
    for (;;) {
      const Metric D = Metric::identity(n, L);
      sub = solve_subproblem(p, x, grad, D, opts.epsilon);
      out.prox_calls += sub.prox_calls;
      q.beta = std::sqrt(L) * sub.d.norm();
      if (q.beta <= opts.epsilon || k >= opts.max_iterations) break;
      q.lambda = local_norm(p.oracle(), x, sub.d);
      q.r = mf * sub.d.norm();
      step = detail::step_for(q);
      if (step.condition_holds) break;
      if (++shrinks > opts.max_shrinks_per_iteration)
        throw SolverAborted("prox_gradient_solve: step condition still fails after " +
                            std::to_string(opts.max_shrinks_per_iteration) + " metric shrinks at iteration " +
                            std::to_string(k) + " (L = " + std::to_string(L) + ")");
      L = std::max(L * opts.metric_shrink_factor, opts.L_floor);
    }

    pending.rec.beta = q.beta;
    pending.rec.residual = sub.d.norm();
    pending.rec.metric_scale = L;
    pending.rec.shrinks = shrinks;
    out.final_residual = sub.d.norm();
    out.final_metric = Metric::identity(n, L);

    if (q.beta <= opts.epsilon || k >= opts.max_iterations) {
      out.converged = q.beta <= opts.epsilon;
      pending.finish(out.trace, clock, out.prox_calls, x, opts.record_iterates);
      break;
    }

    pending.rec.lambda = q.lambda;
    pending.rec.r = q.r;
    pending.rec.alpha = step.alpha;
    pending.rec.predicted_decrease = step.predicted_decrease;
    pending.finish(out.trace, clock, out.prox_calls, x, opts.record_iterates);

    Vector x_next = x + step.alpha * sub.d;
    const double F_next = detail::objective_checked(p, x_next, "prox_gradient_solve: F(x^{k+1})");
    Vector grad_next = p.oracle().gradient(x_next);
    L = std::clamp(bb_estimate(x_next - x, grad_next - grad, L), opts.L_floor, opts.L_ceil);
    x = std::move(x_next);
    grad = std::move(grad_next);
    F = F_next;
    ++out.iterations;
  }
  out.x = std::move(x);
  out.elapsed_seconds = clock.seconds();
  return out;
}

/// sigma = ln(4/3) times a Lanczos estimate of the smallest Hessian eigenvalue
/// at x0. A numerically singular Hessian is floored at 1e-12 sigma_max.
inline double default_newton_sigma(const SmoothOracle& oracle, const Vector& x0, int lanczos_iterations) {
  const LinearOperator op = [&](const Vector& v) { return oracle.hess_vec(x0, v); };
  const RitzBounds ritz = lanczos_extreme(op, oracle.dimension(), lanczos_iterations);
  const double floor = 1e-12 * std::max(ritz.max, 1e-300);
  return std::log(4.0 / 3.0) * std::max(ritz.min, floor);
}

namespace detail {

inline Metric hessian_metric(const SmoothOracle& oracle, const Vector& x) {
  if (oracle.has_dense_hessian()) {
    Matrix H = oracle.hess_dense(x);
    H = 0.5 * (H + H.transpose());
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() == Eigen::Success) return Metric::dense(std::move(H));
    auto shared = std::make_shared<const Matrix>(std::move(H));
    return Metric::hessian_operator([shared](const Vector& v) -> Vector { return *shared * v; }, oracle.dimension());
  }
  std::shared_ptr<const SmoothOracle> self(&oracle, [](const SmoothOracle*) {});
  Vector at = x;
  return Metric::hessian_operator([self, at](const Vector& v) { return self->hess_vec(at, v); }, oracle.dimension());
}

}  // namespace detail

/**
 * Proximal Newton without line search: d^k from the model with H = hess f(x^k),
 * lambda_k = ||d^k||_{x^k}; stop when lambda_k <= epsilon; step
 * ln(1 + r_k) / r_k while lambda_k > sigma and the full step afterwards.
 */
inline SolveResult prox_newton_solve(const ProblemInstance& p, const Vector& x0, const SolverOptions& opts = {}) {
  opts.validate();
  detail::require(x0.size() == p.dimension(), "prox_newton_solve: x0 dimension mismatch");
  const detail::Stopwatch clock;
  const double mf = p.oracle().scl_constant();

  SolveResult out;
  Vector x = x0;
  double F = detail::objective_checked(p, x, "prox_newton_solve: F(x0)");
  out.sigma = opts.sigma_override ? *opts.sigma_override
                                  : default_newton_sigma(p.oracle(), x0, opts.sigma_lanczos_iterations);
  std::optional<double> lambda_prev;

  for (int k = 0;; ++k) {
    detail::PendingRecord pending;
    pending.rec.k = k;
    pending.rec.F_value = F;

    const Vector grad = p.oracle().gradient(x);
    const Metric H = detail::hessian_metric(p.oracle(), x);
    const double tol =
        opts.inner_tol(lambda_prev, opts.epsilon, p.nonsmooth().subgradient_residual(x, grad));
    const SubproblemResult sub = solve_subproblem(p, x, grad, H, tol);
    out.prox_calls += sub.prox_calls;

    StepQuantities q;
    const double dq = sub.d.dot(H.apply(sub.d));
    if (dq < -1e-10 * sub.d.squaredNorm())
      throw SolverAborted("prox_newton_solve: indefinite Hessian at iteration " + std::to_string(k));
    q.lambda = std::sqrt(std::max(dq, 0.0));
    q.beta = q.lambda;
    q.r = mf * sub.d.norm();
    pending.rec.lambda = q.lambda;
    pending.rec.beta = q.beta;
    pending.rec.r = q.r;
    pending.rec.residual = sub.d.norm();
    out.final_residual = sub.d.norm();
    out.final_metric = H;

    if (q.lambda <= opts.epsilon || k >= opts.max_iterations) {
      out.converged = q.lambda <= opts.epsilon;
      pending.finish(out.trace, clock, out.prox_calls, x, opts.record_iterates);
      break;
    }

    const bool damped = q.lambda > out.sigma;
    const double alpha = damped ? damped_newton_step(q.r) : 1.0;
    pending.rec.alpha = alpha;
    pending.rec.predicted_decrease = worst_case_decrement(q, alpha);
    pending.finish(out.trace, clock, out.prox_calls, x, opts.record_iterates);

    x += alpha * sub.d;
    F = detail::objective_checked(p, x, "prox_newton_solve: F(x^{k+1})");
    lambda_prev = q.lambda;
    ++out.iterations;
  }
  out.x = std::move(x);
  out.elapsed_seconds = clock.seconds();
  return out;
}

/// B + y y^T / <y, s> - B s s^T B / <s, B s>, skipped unless
/// <y, s> > 1e-10 ||y|| ||s||. Returns whether the update was applied.
inline bool bfgs_update(Matrix& B, const Vector& s, const Vector& y) {
  const double ys = y.dot(s);
  if (!(ys > 1e-10 * y.norm() * s.norm())) return false;
  const Vector Bs = B * s;
  const double sBs = s.dot(Bs);
  if (!(sBs > 0.0)) return false;
  B.noalias() += y * y.transpose() / ys - Bs * Bs.transpose() / sBs;
  B = 0.5 * (B + B.transpose());
  return true;
}

/**
 * Proximal quasi-Newton with a dense BFGS metric B_k (B_0 = L_0 I) and the
 * analytic step measured in B_k. A failing step condition scales B_k down
 * exactly as the proximal-gradient method scales L_k.
 */
inline SolveResult prox_quasi_newton_solve(const ProblemInstance& p, const Vector& x0,
                                           const SolverOptions& opts = {}) {
  opts.validate();
  detail::require(x0.size() == p.dimension(), "prox_quasi_newton_solve: x0 dimension mismatch");
  const detail::Stopwatch clock;
  const Index n = p.dimension();
  const double mf = p.oracle().scl_constant();

  SolveResult out;
  Vector x = x0;
  double F = detail::objective_checked(p, x, "prox_quasi_newton_solve: F(x0)");
  Vector grad = p.oracle().gradient(x);
  Matrix B = std::clamp(opts.initial_L, opts.L_floor, opts.L_ceil) * Matrix::Identity(n, n);
  std::optional<double> lambda_prev;

  for (int k = 0;; ++k) {
    detail::PendingRecord pending;
    pending.rec.k = k;
    pending.rec.F_value = F;

    int shrinks = 0;
    SubproblemResult sub;
    StepQuantities q;
    StepResult step;
    std::optional<Metric> H;
    const double tol =
        opts.inner_tol(lambda_prev, opts.epsilon, p.nonsmooth().subgradient_residual(x, grad));
    for (;;) {
      try {
        // Before the first curvature pair B is diagonal, and the closed-form prox is exact there.
        const bool diag = (B - Matrix(B.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
        H = diag && (B.diagonal().array() > 0.0).all() ? Metric::diagonal(B.diagonal()) : Metric::bfgs(B);
      } catch (const InvalidArgument&) {
        throw SolverAborted("prox_quasi_newton_solve: BFGS matrix lost positive definiteness at iteration " +
                            std::to_string(k));
      }
      sub = solve_subproblem(p, x, grad, *H, tol);
      out.prox_calls += sub.prox_calls;
      q.beta = H->norm(sub.d);
      if (q.beta <= opts.epsilon || k >= opts.max_iterations) break;
      q.lambda = local_norm(p.oracle(), x, sub.d);
      q.r = mf * sub.d.norm();
      step = detail::step_for(q);
      if (step.condition_holds) break;
      if (++shrinks > opts.max_shrinks_per_iteration)
        throw SolverAborted("prox_quasi_newton_solve: step condition still fails after " +
                            std::to_string(opts.max_shrinks_per_iteration) + " metric shrinks at iteration " +
                            std::to_string(k));
      B *= opts.metric_shrink_factor;
    }

    pending.rec.beta = q.beta;
    pending.rec.residual = sub.d.norm();
    pending.rec.shrinks = shrinks;
    out.final_residual = sub.d.norm();
    out.final_metric = *H;

    if (q.beta <= opts.epsilon || k >= opts.max_iterations) {
      out.converged = q.beta <= opts.epsilon;
      pending.finish(out.trace, clock, out.prox_calls, x, opts.record_iterates);
      break;
    }

    pending.rec.lambda = q.lambda;
    pending.rec.r = q.r;
    pending.rec.alpha = step.alpha;
    pending.rec.predicted_decrease = step.predicted_decrease;
    pending.finish(out.trace, clock, out.prox_calls, x, opts.record_iterates);

    Vector x_next = x + step.alpha * sub.d;
    const double F_next = detail::objective_checked(p, x_next, "prox_quasi_newton_solve: F(x^{k+1})");
    Vector grad_next = p.oracle().gradient(x_next);
    bfgs_update(B, x_next - x, grad_next - grad);
    lambda_prev = q.lambda;
    x = std::move(x_next);
    grad = std::move(grad_next);
    F = F_next;
    ++out.iterations;
  }
  out.x = std::move(x);
  out.elapsed_seconds = clock.seconds();
  return out;
}

enum class SolverKind { prox_gradient, prox_newton, prox_bfgs };

inline std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::prox_gradient:
      return "prox-grad";
    case SolverKind::prox_newton:
      return "prox-newton";
    case SolverKind::prox_bfgs:
      return "prox-bfgs";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver_kind(const std::string& s) {
  if (s == "prox-grad") return SolverKind::prox_gradient;
  if (s == "prox-newton") return SolverKind::prox_newton;
  if (s == "prox-bfgs") return SolverKind::prox_bfgs;
  return std::nullopt;
}

inline SolveResult solve(SolverKind kind, const ProblemInstance& p, const Vector& x0, const SolverOptions& opts = {}) {
  switch (kind) {
    case SolverKind::prox_gradient:
      return prox_gradient_solve(p, x0, opts);
    case SolverKind::prox_newton:
      return prox_newton_solve(p, x0, opts);
    case SolverKind::prox_bfgs:
      return prox_quasi_newton_solve(p, x0, opts);
  }
  throw InvalidArgument("unknown solver");
}

// ---------------------------------------------------------------------------
// Complexity counts of the proximal-Newton phases
// ---------------------------------------------------------------------------

/// floor(log2(ln(2 M_f eps) / ln(2 sigma))); needs 2 M_f eps < 1 and 2 sigma < 1.
inline int quadratic_phase_cap(double mf, double sigma, double eps) {
  if (!(mf > 0.0 && sigma > 0.0 && eps > 0.0)) throw DomainError("quadratic_phase_cap: arguments must be positive");
  if (!(2.0 * mf * eps < 1.0) || !(2.0 * sigma < 1.0))
    throw DomainError("quadratic_phase_cap: needs 2 M_f eps < 1 and 2 sigma < 1");
  return static_cast<int>(std::floor(std::log2(std::log(2.0 * mf * eps) / std::log(2.0 * sigma))));
}

/// floor(gap0 / psi(sigma)).
inline long long damped_phase_cap(double sigma, double gap0) {
  if (!(sigma > 0.0)) throw DomainError("damped_phase_cap: sigma must be positive");
  if (!(gap0 >= 0.0)) throw DomainError("damped_phase_cap: gap0 must be nonnegative");
  return static_cast<long long>(std::floor(gap0 / psi_decrement(sigma)));
}

struct NewtonIterationCaps {
  int quadratic_phase_cap = 0;
  long long damped_phase_cap = 0;
};

inline NewtonIterationCaps newton_iteration_caps(double mf, double sigma, double eps, double gap0) {
  return {quadratic_phase_cap(mf, sigma, eps), damped_phase_cap(sigma, gap0)};
}

// ---------------------------------------------------------------------------
// Local rate diagnostics
// ---------------------------------------------------------------------------

struct RateDiagnostics {
  bool available = false;
  std::string reason;  ///< why diagnostics are unavailable
  double sigma_min_star = 0.0;
  double sigma_max_star = 0.0;
  double rho_star = 0.0;
  double restricted_kappa = 0.0;
  double tail_slope = 0.0;
  double tail_r2 = 0.0;
  int tail_points = 0;
};

struct RateDiagnosticsOptions {
  int eig_iterations = 5000;
  /// Objective gaps at or below gap_floor * max(1, |F*|) are rounding noise.
  double gap_floor = 1e-13;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  detail::require(xs.size() == ys.size() && xs.size() >= 2, "least_squares_line: need two or more points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

/**
 * Linear-rate diagnostics of a proximal-gradient run around a reference
 * solution x_star: extreme Hessian eigenvalues at x_star, the contraction
 * factor rho* = max{L/sigma_min - 1, 1 - L/sigma_max}, the restricted
 * condition number over the tail iterates and a log-linear fit of the tail
 * objective gap. The tail is the last quartile of the iterations whose gap
 * is still above the rounding floor.
 *
 * restricted_kappa is sqrt(max_k q_k / min_k q_k) with
 * q_k = ||H*(x* - x^k)||^2 / ||x* - x^k||^2, so it lives on the same scale as
 * sigma_max / sigma_min.
 */
inline RateDiagnostics rate_diagnostics(const ProblemInstance& p, const Vector& x_star, const RunTrace& trace,
                                        double L_tail, const RateDiagnosticsOptions& opts = {}) {
  detail::require(L_tail > 0.0, "rate_diagnostics: L_tail must be positive");
  RateDiagnostics diag;
  const double F_star = objective_value(p, x_star);
  const double floor = opts.gap_floor * std::max(1.0, std::abs(F_star));
  // Iterations after the gap drops under the rounding floor carry no rate
  // information, so the quartile is taken of the measurable prefix.
  std::size_t n_rec = 0;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace.records[i].F_value - F_star > floor) n_rec = i + 1;
  const std::size_t tail_begin = n_rec - n_rec / 4;

  const SmoothOracle& f = p.oracle();
  LinearOperator hess;
  if (f.has_dense_hessian()) {
    auto H = std::make_shared<const Matrix>(f.hess_dense(x_star));
    hess = [H](const Vector& v) -> Vector { return *H * v; };
  } else {
    hess = [&f, x_star](const Vector& v) { return f.hess_vec(x_star, v); };
  }
  const ExtremeEigs eig = extreme_eigs(hess, p.dimension(), opts.eig_iterations);
  diag.sigma_min_star = eig.sigma_min;
  diag.sigma_max_star = eig.sigma_max;
  if (!(eig.sigma_min > 0.0)) {
    diag.reason = "Hessian at x_star is singular";
    return diag;
  }
  diag.rho_star = std::max(L_tail / eig.sigma_min - 1.0, 1.0 - L_tail / eig.sigma_max);
  if (n_rec / 4 < 4) {
    diag.reason = "fewer than 4 tail iterates";
    return diag;
  }

  std::vector<double> ks, logs;
  double q_min = std::numeric_limits<double>::infinity();
  double q_max = 0.0;
  for (std::size_t i = tail_begin; i < n_rec; ++i) {
    const TraceRecord& rec = trace.records[i];
    const double gap = rec.F_value - F_star;
    if (gap > floor) {
      ks.push_back(static_cast<double>(rec.k));
      logs.push_back(std::log(gap));
    }
    if (rec.iterate) {
      const Vector e = x_star - *rec.iterate;
      const double en = e.squaredNorm();
      if (en > 1e-24 * std::max(1.0, x_star.squaredNorm())) {
        const double q = hess(e).squaredNorm() / en;
        q_min = std::min(q_min, q);
        q_max = std::max(q_max, q);
      }
    }
  }
  diag.tail_points = static_cast<int>(ks.size());
  if (ks.size() < 4) {
    diag.reason = "fewer than 4 tail iterates above the rounding floor";
    return diag;
  }
  const LineFit fit = least_squares_line(ks, logs);
  diag.tail_slope = fit.slope;
  diag.tail_r2 = fit.r2;
  if (q_max > 0.0 && q_min > 0.0) {
    diag.restricted_kappa = std::sqrt(q_max / q_min);
  } else {
    diag.reason = "trace has no stored iterates";
    return diag;
  }
  diag.available = true;
  return diag;
}

}  // namespace sclopt
