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

#include <Eigen/Cholesky>

#include <memory>

namespace sclopt {

/**
 * Variable metric H_k in S^n_{++}: a positive diagonal, a dense SPD matrix,
 * a dense BFGS matrix, or the Hessian of the smooth oracle at a point given
 * only through Hessian-vector products. Every kind carries a positive scale
 * multiplier, so scaled() is O(1) regardless of kind.
 */
class Metric {
 public:
  enum class Kind { diagonal, dense, bfgs, hessian_operator };

  static Metric diagonal(Vector d, double scale = 1.0) {
    detail::require(d.size() > 0, "Metric: empty diagonal");
    detail::require((d.array() > 0.0).all() && d.allFinite(),
                    "Metric: diagonal entries must be positive");
    Metric m(Kind::diagonal, d.size(), scale);
    m.diag_ = std::move(d);
    return m;
  }

  static Metric identity(Index n, double scale = 1.0) {
    return diagonal(Vector::Ones(n), scale);
  }

  static Metric dense(Matrix H, double scale = 1.0) {
    return from_matrix(Kind::dense, std::move(H), scale);
  }

  static Metric bfgs(Matrix B, double scale = 1.0) {
    return from_matrix(Kind::bfgs, std::move(B), scale);
  }

  /// Matrix-free SPD operator (e.g. v -> hess_vec(x, v)). Positive
  /// definiteness is the caller's promise; it cannot be checked cheaply.
  static Metric hessian_operator(LinearOperator op, Index n, double scale = 1.0) {
    detail::require(n > 0, "Metric: operator dimension must be positive");
    detail::require(static_cast<bool>(op), "Metric: empty operator");
    Metric m(Kind::hessian_operator, n, scale);
    m.op_ = std::make_shared<LinearOperator>(std::move(op));
    return m;
  }

  Kind kind() const noexcept { return kind_; }
  Index dimension() const noexcept { return n_; }
  double scale() const noexcept { return scale_; }
  bool is_diagonal() const noexcept { return kind_ == Kind::diagonal; }

  /// Effective diagonal scale * D; only for diagonal metrics.
  Vector diagonal_entries() const {
    detail::require(is_diagonal(), "Metric: not diagonal");
    return scale_ * diag_;
  }

  Metric scaled(double c) const {
    detail::require(c > 0.0 && std::isfinite(c), "Metric: scale factor must be positive");
    Metric m = *this;
    m.scale_ *= c;
    return m;
  }

  Vector apply(const Vector& v) const {
    switch (kind_) {
      case Kind::diagonal:
        return scale_ * diag_.cwiseProduct(v);
      case Kind::dense:
      case Kind::bfgs:
        return scale_ * (*dense_ * v);
      case Kind::hessian_operator:
        return scale_ * (*op_)(v);
    }
    return {};
  }

  /// H^{-1} v. Matrix-free metrics use conjugate gradients.
  Vector solve(const Vector& v) const {
    switch (kind_) {
      case Kind::diagonal:
        return v.cwiseQuotient(diag_) / scale_;
      case Kind::dense:
      case Kind::bfgs:
        return llt_->solve(v) / scale_;
      case Kind::hessian_operator:
        return conjugate_gradient(v);
    }
    return {};
  }

  double norm(const Vector& v) const { return std::sqrt(std::max(0.0, v.dot(apply(v)))); }
  double dual_norm(const Vector& v) const { return std::sqrt(std::max(0.0, v.dot(solve(v)))); }

  /// Largest eigenvalue: exact for diagonal metrics, power iteration otherwise.
  double max_eigenvalue(int iters = 100) const {
    if (is_diagonal()) return scale_ * diag_.maxCoeff();
    return extreme_eigs([this](const Vector& v) { return apply(v); }, n_, iters).sigma_max;
  }

  /// Dense representation scale * H (materialized column by column for operators).
  Matrix to_dense() const {
    switch (kind_) {
      case Kind::diagonal:
        return Matrix((scale_ * diag_).asDiagonal());
      case Kind::dense:
      case Kind::bfgs:
        return scale_ * *dense_;
      case Kind::hessian_operator: {
        Matrix H(n_, n_);
        for (Index j = 0; j < n_; ++j) H.col(j) = apply(Vector::Unit(n_, j));
        return 0.5 * (H + H.transpose());
      }
    }
    return {};
  }

  /// Unscaled stored matrix for dense and BFGS metrics.
  const Matrix& stored_matrix() const {
    detail::require(dense_ != nullptr, "Metric: no stored matrix");
    return *dense_;
  }

 private:
  Metric(Kind kind, Index n, double scale) : kind_(kind), n_(n), scale_(scale) {
    detail::require(scale > 0.0 && std::isfinite(scale), "Metric: scale must be positive");
  }

  static Metric from_matrix(Kind kind, Matrix H, double scale) {
    detail::require(H.rows() == H.cols() && H.rows() > 0, "Metric: matrix must be square");
    detail::require(H.allFinite(), "Metric: matrix has non-finite entries");
    const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    detail::require(asym <= 1e-10 * std::max(1.0, H.cwiseAbs().maxCoeff()),
                    "Metric: matrix is not symmetric");
    Metric m(kind, H.rows(), scale);
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(H);
    detail::require(llt->info() == Eigen::Success, "Metric: Cholesky factorization failed (not SPD)");
    m.dense_ = std::make_shared<const Matrix>(std::move(H));
    m.llt_ = std::move(llt);
    return m;
  }

  Vector conjugate_gradient(const Vector& b) const {
    Vector x = Vector::Zero(n_);
    Vector r = b;
    Vector p = r;
    double rr = r.dot(r);
    const double target = 1e-28 * std::max(rr, 1e-300);
    const int cap = static_cast<int>(10 * n_ + 100);
    for (int it = 0; it < cap && rr > target; ++it) {
      const Vector Ap = apply(p);
      const double pAp = p.dot(Ap);
      if (!(pAp > 0.0)) throw NonConvexError("Metric: operator is not positive definite");
      const double a = rr / pAp;
      x += a * p;
      r -= a * Ap;
      const double rr_next = r.dot(r);
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
    if (rr > 1e-20 * std::max(b.squaredNorm(), 1e-300))
      throw NonConvergence("Metric: conjugate gradients stalled", std::sqrt(rr));
    return x;
  }

  Kind kind_;
  Index n_;
  double scale_;
  Vector diag_;
  std::shared_ptr<const Matrix> dense_;
  std::shared_ptr<const Eigen::LLT<Matrix>> llt_;
  std::shared_ptr<const LinearOperator> op_;
};

}  // namespace sclopt
