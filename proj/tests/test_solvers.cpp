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

#include "sclopt/sclopt.hpp"
#include "support/desk.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sclopt;
namespace st = sclopt::testing;

namespace {

// SPD matrix with eigenvalues spread evenly over [lo, hi].
Matrix spectrum_matrix(Index n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Matrix G = Matrix::NullaryExpr(n, n, [&]() { return normal(rng); });
  const Matrix Q = G.householderQr().householderQ();
  const Vector ev = Vector::LinSpaced(n, lo, hi);
  return Q * ev.asDiagonal() * Q.transpose();
}

ProblemInstance quadratic_problem(const Matrix& A, const Vector& b, std::shared_ptr<const NonsmoothTerm> g) {
  return ProblemInstance(quadratic_oracle(A, b), std::move(g));
}

}  // namespace

TEST(SolverOptions, Validation) {
  SolverOptions o;
  o.metric_shrink_factor = 1.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.epsilon = 0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.sigma_override = -1;
  EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(ProxGradient, QuadraticWithinTenKappa) {
  const Matrix A = spectrum_matrix(6, 1.0, 8.0, 1);
  const Vector b = Vector::LinSpaced(6, -1, 1);
  const auto p = quadratic_problem(A, b, std::make_shared<ZeroTerm>());
  SolverOptions o;
  o.initial_L = 8.0;
  o.epsilon = 1e-12;
  const SolveResult res = prox_gradient_solve(p, Vector::Zero(6), o);
  ASSERT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 80);
  EXPECT_LE(fixed_point_residual(p, res.x, Metric::identity(6)), 1e-10);
  EXPECT_LE((res.x - A.llt().solve(b)).norm(), 1e-10);
}

TEST(ProxGradient, OptimalStartTakesNoSteps) {
  const auto p = quadratic_problem(Matrix::Identity(3, 3), Vector::Zero(3), std::make_shared<L1Norm>(3, 1.0));
  const SolveResult res = prox_gradient_solve(p, Vector::Zero(3));
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.x, Vector::Zero(3));
  EXPECT_EQ(res.trace.size(), 1u);
}

TEST(ProxGradient, DeskDescentInequalityAndMonotonicity) {
  const auto p = st::desk_logistic(2);
  SolverOptions o;
  o.record_iterates = true;
  const SolveResult res = prox_gradient_solve(p, Vector::Zero(p.dimension()), o);
  ASSERT_TRUE(res.converged);
  const auto& rec = res.trace.records;
  for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
    EXPECT_LE(rec[k + 1].F_value, rec[k].F_value);
    EXPECT_LE(rec[k + 1].F_value, rec[k].F_value - rec[k].predicted_decrease + 1e-10 * (1 + std::abs(rec[k].F_value)))
        << "k = " << k;
    EXPECT_DOUBLE_EQ(objective_value(p, *rec[k].iterate), rec[k].F_value);
  }
}

TEST(ProxGradient, IterationCapReturnsUnconverged) {
  const auto p = st::desk_logistic(1);
  SolverOptions o;
  o.max_iterations = 3;
  const SolveResult res = prox_gradient_solve(p, Vector::Zero(p.dimension()), o);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 3);
}

TEST(ProxGradient, ShrinkCapAborts) {
  const auto p = st::desk_logistic(1);
  SolverOptions o;
  o.initial_L = 1e6;
  o.max_shrinks_per_iteration = 1;
  EXPECT_THROW(prox_gradient_solve(p, Vector::Zero(p.dimension()), o), SolverAborted);
}

TEST(ProxGradient, GeometricProgramConverges) {
  const auto p = synth_gp_instance(20, 10, 5);
  const SolveResult res = prox_gradient_solve(p, Vector::Zero(20));
  EXPECT_TRUE(res.converged);
  EXPECT_LE(fixed_point_residual(p, res.x, Metric::identity(20)), 1e-7);
}

TEST(ProxNewton, QuadraticIsOneFullStep) {
  const Matrix A = spectrum_matrix(5, 0.5, 20.0, 2);
  const Vector b = Vector::LinSpaced(5, 1, 3);
  const auto p = quadratic_problem(A, b, std::make_shared<ZeroTerm>());
  const SolveResult res = prox_newton_solve(p, Vector::Zero(5));
  ASSERT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_EQ(res.trace.records[0].alpha, 1.0);
  EXPECT_LE((res.x - A.llt().solve(b)).norm(), 1e-12);
}

TEST(ProxNewton, DampedStepsFollowFormula) {
  const auto p = st::desk_logistic(4);
  const SolveResult res = prox_newton_solve(p, Vector::Zero(p.dimension()));
  ASSERT_TRUE(res.converged);
  int damped = 0;
  bool full_phase = false;
  double last_full = INFINITY;
  for (std::size_t k = 0; k + 1 < res.trace.size(); ++k) {
    const TraceRecord& r = res.trace.records[k];
    if (r.lambda > res.sigma) {
      EXPECT_FALSE(full_phase) << "damped step after the full-step phase began";
      EXPECT_NEAR(r.alpha, std::log1p(r.r) / r.r, 1e-12);
      ++damped;
    } else {
      full_phase = true;
      EXPECT_EQ(r.alpha, 1.0);
      EXPECT_LT(r.lambda, last_full);
      last_full = r.lambda;
    }
  }
  EXPECT_GT(damped, 0);
  EXPECT_TRUE(full_phase);
}

TEST(ProxNewton, SigmaOverrideIsUsed) {
  const auto p = st::desk_logistic(1);
  SolverOptions o;
  o.sigma_override = 0.05;
  EXPECT_EQ(prox_newton_solve(p, Vector::Zero(p.dimension()), o).sigma, 0.05);
}

TEST(ProxNewton, DefaultSigmaBelowSmallestEigenvalue) {
  const auto p = st::desk_logistic(1);
  const Vector x0 = Vector::Zero(p.dimension());
  const double sigma = default_newton_sigma(p.oracle(), x0, 20);
  const double ev_min = st::dense_eigenvalues(p.oracle().hess_dense(x0)).minCoeff();
  // A Ritz value never undershoots the smallest eigenvalue; 20 steps land within 0.1%.
  EXPECT_GE(sigma, std::log(4.0 / 3.0) * ev_min * (1 - 1e-12));
  EXPECT_LE(sigma, std::log(4.0 / 3.0) * ev_min * (1 + 1e-3));
}

TEST(ProxBfgs, QuadraticWithinThreeN) {
  const Matrix A = spectrum_matrix(5, 1.0, 10.0, 3);
  const Vector b = Vector::LinSpaced(5, -2, 2);
  const auto p = quadratic_problem(A, b, std::make_shared<ZeroTerm>());
  SolverOptions o;
  o.epsilon = 1e-12;
  const SolveResult res = prox_quasi_newton_solve(p, Vector::Zero(5), o);
  ASSERT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 15);
  EXPECT_LE(fixed_point_residual(p, res.x, Metric::identity(5)), 1e-10);
}

TEST(ProxBfgs, FirstStepEqualsProxGradientStep) {
  const auto p = st::desk_logistic(5);
  SolverOptions o;
  o.max_iterations = 1;
  o.initial_L = 2.0;
  o.record_iterates = true;
  const SolveResult qn = prox_quasi_newton_solve(p, Vector::Zero(p.dimension()), o);
  const SolveResult pg = prox_gradient_solve(p, Vector::Zero(p.dimension()), o);
  ASSERT_EQ(qn.trace.size(), 2u);
  ASSERT_EQ(pg.trace.size(), 2u);
  EXPECT_NEAR(qn.trace.records[0].alpha, pg.trace.records[0].alpha, 1e-10);
  EXPECT_NEAR(qn.trace.records[0].beta, pg.trace.records[0].beta, 1e-10);
  EXPECT_LE((qn.x - pg.x).norm(), 1e-10);
}

TEST(Bfgs, UpdateKeepsMatrixPositiveDefinite) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  const auto f = logistic_oracle(synth_logistic_data(40, 6, 6, false, 1.0));
  Matrix B = Matrix::Identity(6, 6);
  Vector x = Vector::Zero(6);
  int applied = 0;
  for (int k = 0; k < 50; ++k) {
    const Vector s = Vector::NullaryExpr(6, [&]() { return 0.3 * normal(rng); });
    applied += bfgs_update(B, s, f->gradient(x + s) - f->gradient(x)) ? 1 : 0;
    x += s;
    for (int t = 0; t < 5; ++t) {
      const Vector v = Vector::NullaryExpr(6, [&]() { return normal(rng); });
      EXPECT_GT(v.dot(B * v), 0.0);
    }
  }
  EXPECT_GT(applied, 0);
  Matrix C = Matrix::Identity(2, 2);
  EXPECT_FALSE(bfgs_update(C, Vector{{1.0, 0.0}}, Vector{{-1.0, 0.0}}));
  EXPECT_EQ(C, Matrix::Identity(2, 2));
}

TEST(Solvers, TerminationSoundness) {
  const auto p = st::desk_logistic(6);
  SolverOptions o;
  o.epsilon = 1e-8;
  for (SolverKind kind : {SolverKind::prox_gradient, SolverKind::prox_newton, SolverKind::prox_bfgs}) {
    const SolveResult res = solve(kind, p, Vector::Zero(p.dimension()), o);
    ASSERT_TRUE(res.converged) << to_string(kind);
    ASSERT_TRUE(res.final_metric.has_value());
    EXPECT_LE(fixed_point_residual(p, res.x, *res.final_metric), 10 * o.epsilon) << to_string(kind);
  }
}

TEST(Solvers, AgreeOnDeskOptimum) {
  const auto p = st::desk_logistic(7);
  const SolveResult ref = st::reference_solve(p);
  const double F_star = objective_value(p, ref.x);
  for (SolverKind kind : {SolverKind::prox_gradient, SolverKind::prox_bfgs}) {
    const SolveResult res = solve(kind, p, Vector::Zero(p.dimension()));
    EXPECT_NEAR(objective_value(p, res.x), F_star, 1e-10) << to_string(kind);
  }
}

TEST(Solvers, NamesRoundTrip) {
  for (SolverKind kind : {SolverKind::prox_gradient, SolverKind::prox_newton, SolverKind::prox_bfgs})
    EXPECT_EQ(parse_solver_kind(to_string(kind)), kind);
  EXPECT_FALSE(parse_solver_kind("newton").has_value());
}

TEST(NewtonCaps, ClosedFormValues) {
  EXPECT_EQ(quadratic_phase_cap(1.0, 0.1, 1e-8), 3);
  EXPECT_EQ(damped_phase_cap(0.1, 0.0), 0);
  EXPECT_EQ(damped_phase_cap(1.0, 1.0), 2);
  const auto caps = newton_iteration_caps(1.0, 0.1, 1e-8, 0.0);
  EXPECT_EQ(caps.quadratic_phase_cap, 3);
  EXPECT_EQ(caps.damped_phase_cap, 0);
}

TEST(NewtonCaps, DomainErrors) {
  EXPECT_THROW(quadratic_phase_cap(1.0, 0.5, 1e-8), DomainError);
  EXPECT_THROW(quadratic_phase_cap(1e9, 0.1, 1e-8), DomainError);
  EXPECT_THROW(quadratic_phase_cap(0.0, 0.1, 1e-8), DomainError);
  EXPECT_THROW(newton_iteration_caps(1.0, 1.0, 1e-8, 1.0), DomainError);
  EXPECT_THROW(damped_phase_cap(0.1, -1.0), DomainError);
}

TEST(RateDiagnostics, ContractionFactorFormula) {
  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << 1.0, 4.0;
  const auto p = quadratic_problem(A, Vector::Zero(2), std::make_shared<ZeroTerm>());
  const RateDiagnostics d = rate_diagnostics(p, Vector::Zero(2), RunTrace{}, 1.0);
  EXPECT_FALSE(d.available);
  EXPECT_NEAR(d.sigma_min_star, 1.0, 1e-8);
  EXPECT_NEAR(d.sigma_max_star, 4.0, 1e-8);
  EXPECT_NEAR(d.rho_star, 0.75, 1e-8);
}

TEST(RateDiagnostics, SingleEigenvectorTailHasUnitKappa) {
  Matrix A = Matrix::Zero(3, 3);
  A.diagonal() << 1.0, 4.0, 9.0;
  const auto p = quadratic_problem(A, Vector::Zero(3), std::make_shared<ZeroTerm>());
  RunTrace trace;
  for (int k = 0; k < 40; ++k) {
    TraceRecord r;
    r.k = k;
    const Vector x = std::pow(0.5, k) * Vector::Unit(3, 1);
    r.F_value = objective_value(p, x);
    r.iterate = x;
    trace.records.push_back(r);
  }
  const RateDiagnostics d = rate_diagnostics(p, Vector::Zero(3), trace, 4.0);
  ASSERT_TRUE(d.available) << d.reason;
  EXPECT_NEAR(d.restricted_kappa, 1.0, 1e-12);
  EXPECT_NEAR(d.tail_slope, 2 * std::log(0.5), 1e-9);
  EXPECT_NEAR(d.tail_r2, 1.0, 1e-12);
}

TEST(RateDiagnostics, ShortTraceUnavailable) {
  const auto p = quadratic_problem(Matrix::Identity(2, 2), Vector::Zero(2), std::make_shared<ZeroTerm>());
  RunTrace trace;
  for (int k = 0; k < 8; ++k) {
    TraceRecord r;
    r.k = k;
    r.F_value = std::pow(0.1, k);
    trace.records.push_back(r);
  }
  const RateDiagnostics d = rate_diagnostics(p, Vector::Zero(2), trace, 1.0);
  EXPECT_FALSE(d.available);
  EXPECT_FALSE(d.reason.empty());
}

TEST(RateDiagnostics, RestrictedKappaWithinFullKappa) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto p = st::desk_logistic(seed);
    SolverOptions o;
    o.epsilon = 1e-10;
    o.record_iterates = true;
    const SolveResult res = prox_gradient_solve(p, Vector::Zero(p.dimension()), o);
    const SolveResult ref = st::reference_solve(p);
    const RateDiagnostics d = rate_diagnostics(p, ref.x, res.trace, res.trace.back().metric_scale);
    ASSERT_TRUE(d.available) << d.reason;
    const Vector ev = st::dense_eigenvalues(p.oracle().hess_dense(ref.x));
    EXPECT_LE(d.restricted_kappa, ev.maxCoeff() / ev.minCoeff() + 1e-6);
    EXPECT_LE(d.sigma_min_star, d.sigma_max_star);
    EXPECT_LT(d.tail_slope, 0.0);
  }
}

TEST(LeastSquaresLine, ExactLine) {
  const LineFit fit = least_squares_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_DOUBLE_EQ(fit.slope, 2.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 1.0);
  EXPECT_DOUBLE_EQ(fit.r2, 1.0);
  EXPECT_THROW(least_squares_line({1}, {1}), InvalidArgument);
}
