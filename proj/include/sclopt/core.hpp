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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sclopt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument shapes, out-of-range options, malformed problem data.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A function value, gradient or Hessian product evaluated to inf/nan.
class NonFiniteValue : public Error {
 public:
  NonFiniteValue(std::string where, double value)
      : Error("non-finite value " + std::to_string(value) + " in " + where),
        where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// A closed-form expression was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Negative curvature where the model requires a convex oracle.
class NonConvexError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine hit its iteration cap before reaching tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double achieved)
      : Error(what + " (achieved residual " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// An outer solver stopped early; the message carries the diagnostic.
class SolverAborted : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw InvalidArgument(msg);
}

inline double check_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw NonFiniteValue(where, v);
  return v;
}

template <typename Derived>
typename Derived::PlainObject check_finite(const Eigen::MatrixBase<Derived>& expr, const char* where) {
  typename Derived::PlainObject v = expr;
  if (!v.allFinite()) {
    for (Index i = 0; i < v.size(); ++i) {
      const double e = v.data()[i];
      if (!std::isfinite(e))
        throw NonFiniteValue(std::string(where) + " [entry " + std::to_string(i) + "]", e);
    }
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Oracle contracts
// ---------------------------------------------------------------------------

/**
 * Smooth convex part f of F = f + g.
 *
 * Implementations are immutable after construction and may be evaluated
 * concurrently. scl_constant() is the self-concordant-like constant M_f:
 * |phi'''(t)| <= M_f phi''(t) ||u||_2 along every line x + t u.
 */
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Vector hess_vec(const Vector& x, const Vector& v) const = 0;

  /// True when hess_dense() is cheap enough to call.
  virtual bool has_dense_hessian() const { return false; }
  virtual Matrix hess_dense(const Vector& /*x*/) const {
    throw InvalidArgument("oracle does not provide a dense Hessian");
  }

  virtual double scl_constant() const = 0;
  virtual std::string name() const = 0;
};

/**
 * Proper, closed, convex term g with a cheap prox under a diagonal metric.
 */
class NonsmoothTerm {
 public:
  virtual ~NonsmoothTerm() = default;

  /// g(x); +inf outside the domain of an indicator.
  virtual double value(const Vector& x) const = 0;

  /// argmin_z { g(z) + 1/2 sum_i D_i (z_i - u_i)^2 }, D_i > 0.
  virtual Vector prox_diag(const Vector& u, const Vector& D) const = 0;

  /// Euclidean distance from -v to the subdifferential of g at x.
  virtual double subgradient_residual(const Vector& x, const Vector& v) const = 0;

  /// Coordinates of x fixed by g's structure (e.g. zeros of an l1 term),
  /// and for the remaining free ones the subgradient g is smooth with.
  /// Terms that cannot describe themselves this way return std::nullopt.
  struct ActiveSet {
    std::vector<bool> fixed;
    Vector smooth_subgradient;
  };
  virtual std::optional<ActiveSet> active_set(const Vector& /*x*/) const { return std::nullopt; }

  virtual bool is_zero() const { return false; }
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Problem instance and iterate bookkeeping
// ---------------------------------------------------------------------------

/// F = f + g over R^n.
class ProblemInstance {
 public:
  ProblemInstance(std::shared_ptr<const SmoothOracle> oracle,
                  std::shared_ptr<const NonsmoothTerm> nonsmooth)
      : oracle_(std::move(oracle)), nonsmooth_(std::move(nonsmooth)) {
    detail::require(oracle_ != nullptr, "problem needs a smooth oracle");
    detail::require(nonsmooth_ != nullptr, "problem needs a nonsmooth term");
    detail::require(oracle_->dimension() > 0, "problem dimension must be positive");
    detail::require(oracle_->scl_constant() >= 0.0, "M_f must be nonnegative");
  }

  const SmoothOracle& oracle() const noexcept { return *oracle_; }
  const NonsmoothTerm& nonsmooth() const noexcept { return *nonsmooth_; }
  std::shared_ptr<const SmoothOracle> oracle_ptr() const noexcept { return oracle_; }
  std::shared_ptr<const NonsmoothTerm> nonsmooth_ptr() const noexcept { return nonsmooth_; }
  Index dimension() const noexcept { return oracle_->dimension(); }

 private:
  std::shared_ptr<const SmoothOracle> oracle_;
  std::shared_ptr<const NonsmoothTerm> nonsmooth_;
};

/// F(x) = f(x) + g(x). Throws NonFiniteValue when either part overflows.
inline double objective_value(const ProblemInstance& p, const Vector& x) {
  detail::require(x.size() == p.dimension(), "objective_value: dimension mismatch");
  const double f = detail::check_finite(p.oracle().value(x), "objective_value: f(x)");
  const double g = p.nonsmooth().value(x);
  if (std::isnan(g)) throw NonFiniteValue("objective_value: g(x)", g);
  return f + g;
}

/// x^k, the subproblem solution s^k and d^k = s^k - x^k.
struct IterateState {
  Vector x;
  Vector s;
  Vector d;
  int k = 0;

  void set_subproblem_solution(Vector solution) {
    s = std::move(solution);
    d = s - x;
  }
};

/// One row of a solver trace, describing iteration k.
struct TraceRecord {
  int k = 0;
  double F_value = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double r = 0.0;
  double beta = 0.0;
  double residual = 0.0;  ///< ||d^k||_2
  double predicted_decrease = 0.0;
  double metric_scale = 0.0;  ///< L_k for scalar metrics, 0 otherwise
  int shrinks = 0;
  double elapsed_seconds = 0.0;
  std::size_t prox_call_count = 0;  ///< cumulative
  std::optional<Vector> iterate;    ///< x^k, only when requested
};

struct RunTrace {
  std::vector<TraceRecord> records;

  bool empty() const noexcept { return records.empty(); }
  std::size_t size() const noexcept { return records.size(); }
  const TraceRecord& back() const { return records.back(); }
};

}  // namespace sclopt
