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

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <memory>

namespace sclopt {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense Hessians are only assembled up to this dimension.
inline constexpr Index kMaxDenseHessianDim = 2000;

namespace detail {

// log(1 + e^t) without overflow.
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// 1 / (1 + e^{-t}) without overflow.
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double max_row_norm(const SparseMatrix& W) {
  double best = 0.0;
  for (Index j = 0; j < W.outerSize(); ++j) best = std::max(best, W.row(j).norm());
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Binary logistic loss
// ---------------------------------------------------------------------------

/// N samples w^(j) (rows of `samples`) with labels y_j in {-1, +1}.
struct LogisticData {
  SparseMatrix samples;
  Vector labels;
  bool include_bias = false;

  Index sample_count() const noexcept { return samples.rows(); }
  Index feature_count() const noexcept { return samples.cols(); }
  Index dimension() const noexcept { return feature_count() + (include_bias ? 1 : 0); }

  void validate() const {
    detail::require(samples.rows() >= 1, "LogisticData: need at least one sample");
    detail::require(samples.cols() >= 1, "LogisticData: need at least one feature");
    detail::require(labels.size() == samples.rows(), "LogisticData: label count mismatch");
    for (Index j = 0; j < labels.size(); ++j)
      detail::require(labels[j] == 1.0 || labels[j] == -1.0, "LogisticData: labels must be +1 or -1");
    for (Index k = 0; k < samples.nonZeros(); ++k)
      detail::require(std::isfinite(samples.valuePtr()[k]), "LogisticData: non-finite feature value");
  }
};

/**
 * f(x, mu) = N^{-1} sum_j log(1 + exp(-y_j (<w^(j), x> + mu))).
 *
 * With include_bias the bias mu is the last coordinate of the variable.
 * M_f = max_j ||w^(j)||_2, where the bias contributes a unit feature.
 */
class LogisticOracle final : public SmoothOracle {
 public:
  explicit LogisticOracle(LogisticData data) : data_(std::move(data)) {
    data_.validate();
    data_.samples.makeCompressed();
    double m = 0.0;
    for (Index j = 0; j < data_.samples.rows(); ++j) {
      const double sq = data_.samples.row(j).squaredNorm() + (data_.include_bias ? 1.0 : 0.0);
      m = std::max(m, std::sqrt(sq));
    }
    mf_ = m;
  }

  Index dimension() const override { return data_.dimension(); }
  double scl_constant() const override { return mf_; }
  std::string name() const override { return "logistic"; }
  bool has_dense_hessian() const override { return dimension() <= kMaxDenseHessianDim; }
  const LogisticData& data() const noexcept { return data_; }

  double value(const Vector& x) const override {
    const Vector m = margins(x);
    double s = 0.0;
    for (Index j = 0; j < m.size(); ++j) s += detail::softplus(-m[j]);
    return detail::check_finite(s / static_cast<double>(m.size()), "logistic value");
  }

  Vector gradient(const Vector& x) const override {
    const Vector m = margins(x);
    Vector c(m.size());
    for (Index j = 0; j < m.size(); ++j) c[j] = -data_.labels[j] * detail::sigmoid(-m[j]);
    return detail::check_finite(lift_transpose(c) / static_cast<double>(m.size()), "logistic gradient");
  }

  Vector hess_vec(const Vector& x, const Vector& v) const override {
    detail::require(v.size() == dimension(), "logistic hess_vec: dimension mismatch");
    const Vector s = curvature_weights(x);
    Vector t = data_.samples * v.head(data_.feature_count());
    if (data_.include_bias) t.array() += v[data_.feature_count()];
    return detail::check_finite(lift_transpose(s.cwiseProduct(t)) / static_cast<double>(s.size()),
                                "logistic hess_vec");
  }

  Matrix hess_dense(const Vector& x) const override {
    detail::require(has_dense_hessian(), "logistic: dimension too large for a dense Hessian");
    const Vector s = curvature_weights(x);
    const Index p = data_.feature_count();
    const Index n = dimension();
    Matrix H = Matrix::Zero(n, n);
    const SparseMatrix& W = data_.samples;
    for (Index j = 0; j < W.rows(); ++j) {
      for (SparseMatrix::InnerIterator a(W, j); a; ++a) {
        for (SparseMatrix::InnerIterator b(W, j); b; ++b) H(a.col(), b.col()) += s[j] * a.value() * b.value();
        if (data_.include_bias) {
          H(a.col(), p) += s[j] * a.value();
          H(p, a.col()) += s[j] * a.value();
        }
      }
      if (data_.include_bias) H(p, p) += s[j];
    }
    return H / static_cast<double>(W.rows());
  }

 private:
  Vector margins(const Vector& x) const {
    detail::require(x.size() == dimension(), "logistic: dimension mismatch");
    Vector z = data_.samples * x.head(data_.feature_count());
    if (data_.include_bias) z.array() += x[data_.feature_count()];
    return z.cwiseProduct(data_.labels);
  }

  // sigma(m) sigma(-m), the per-sample second derivative.
  Vector curvature_weights(const Vector& x) const {
    const Vector m = margins(x);
    Vector s(m.size());
    for (Index j = 0; j < m.size(); ++j) s[j] = detail::sigmoid(m[j]) * detail::sigmoid(-m[j]);
    return s;
  }

  // [W^T c ; sum(c)] (the sum only with a bias coordinate).
  Vector lift_transpose(const Vector& c) const {
    Vector out(dimension());
    out.head(data_.feature_count()) = data_.samples.transpose() * c;
    if (data_.include_bias) out[data_.feature_count()] = c.sum();
    return out;
  }

  LogisticData data_;
  double mf_ = 0.0;
};

// ---------------------------------------------------------------------------
// Multinomial logistic loss
// ---------------------------------------------------------------------------

/// N samples over m explicit classes plus an implicit reference class whose
/// logit is fixed to 0. Row j of `labels` is one-hot or all zero (reference).
struct MultinomialData {
  SparseMatrix samples;
  Matrix labels;

  Index sample_count() const noexcept { return samples.rows(); }
  Index feature_count() const noexcept { return samples.cols(); }
  Index class_count() const noexcept { return labels.cols(); }

  void validate() const {
    detail::require(samples.rows() >= 1 && samples.cols() >= 1, "MultinomialData: empty sample matrix");
    detail::require(labels.rows() == samples.rows(), "MultinomialData: label row count mismatch");
    detail::require(labels.cols() >= 1, "MultinomialData: need at least one explicit class");
    for (Index j = 0; j < labels.rows(); ++j) {
      double total = 0.0;
      for (Index i = 0; i < labels.cols(); ++i) {
        detail::require(labels(j, i) == 0.0 || labels(j, i) == 1.0, "MultinomialData: labels must be 0/1");
        total += labels(j, i);
      }
      detail::require(total <= 1.0, "MultinomialData: a label row sums to more than 1");
    }
  }
};

/**
 * f(X) = N^{-1} sum_j [ log(1 + sum_i e^{<w^(j), X_i>}) - sum_i y_i^(j) <w^(j), X_i> ].
 *
 * X is m x p, flattened row-major (class i occupies x[i*p, (i+1)*p)).
 * The reported constant is sqrt(6) N^{-1} max_j ||w^(j)||_2.
 */
class MultinomialOracle final : public SmoothOracle {
 public:
  explicit MultinomialOracle(MultinomialData data) : data_(std::move(data)) {
    data_.validate();
    data_.samples.makeCompressed();
    mf_ = std::sqrt(6.0) * detail::max_row_norm(data_.samples) / static_cast<double>(data_.sample_count());
  }

  Index dimension() const override { return data_.class_count() * data_.feature_count(); }
  double scl_constant() const override { return mf_; }
  std::string name() const override { return "multinomial"; }
  const MultinomialData& data() const noexcept { return data_; }

  double value(const Vector& x) const override {
    const Matrix Z = logits(x);
    double total = 0.0;
    for (Index j = 0; j < Z.rows(); ++j) {
      const double shift = std::max(0.0, Z.row(j).maxCoeff());
      const double lse = shift + std::log(std::exp(-shift) + (Z.row(j).array() - shift).exp().sum());
      total += lse - Z.row(j).dot(data_.labels.row(j));
    }
    return detail::check_finite(total / static_cast<double>(Z.rows()), "multinomial value");
  }

  Vector gradient(const Vector& x) const override {
    const Matrix P = probabilities(logits(x));
    return detail::check_finite(pull_back(P - data_.labels), "multinomial gradient");
  }

  Vector hess_vec(const Vector& x, const Vector& v) const override {
    detail::require(v.size() == dimension(), "multinomial hess_vec: dimension mismatch");
    const Matrix P = probabilities(logits(x));
    const Matrix A = logits(v);
    const Matrix PA = P.cwiseProduct(A);
    const Vector mean = PA.rowwise().sum();
    const Matrix B = PA - P.cwiseProduct(mean.replicate(1, P.cols()));
    return detail::check_finite(pull_back(B), "multinomial hess_vec");
  }

 private:
  // Z = W X^T, N x m.
  Matrix logits(const Vector& x) const {
    detail::require(x.size() == dimension(), "multinomial: dimension mismatch");
    const Eigen::Map<const RowMajorMatrix> X(x.data(), data_.class_count(), data_.feature_count());
    return data_.samples * X.transpose();
  }

  static Matrix probabilities(const Matrix& Z) {
    Matrix P(Z.rows(), Z.cols());
    for (Index j = 0; j < Z.rows(); ++j) {
      const double shift = std::max(0.0, Z.row(j).maxCoeff());
      const Eigen::RowVectorXd e = (Z.row(j).array() - shift).exp().matrix();
      P.row(j) = e / (std::exp(-shift) + e.sum());
    }
    return P;
  }

  // N^{-1} (W^T C)^T flattened row-major, C is N x m.
  Vector pull_back(const Matrix& C) const {
    const RowMajorMatrix G = (data_.samples.transpose() * C).transpose() / static_cast<double>(data_.sample_count());
    return Eigen::Map<const Vector>(G.data(), G.size());
  }

  MultinomialData data_;
  double mf_ = 0.0;
};

// ---------------------------------------------------------------------------
// Exponential sum (geometric-programming style objective)
// ---------------------------------------------------------------------------

/// Rows of `exponents` are a_i; f(x) = sum_i exp(<a_i, x> + b_i) + <c, x>.
struct ExpSumData {
  Matrix exponents;
  Vector offsets;
  Vector linear;

  void validate() const {
    detail::require(exponents.rows() >= 1 && exponents.cols() >= 1, "ExpSumData: need m >= 1 terms");
    detail::require(offsets.size() == exponents.rows(), "ExpSumData: offset count mismatch");
    detail::require(linear.size() == exponents.cols(), "ExpSumData: linear term dimension mismatch");
    detail::require(exponents.allFinite() && offsets.allFinite() && linear.allFinite(),
                    "ExpSumData: non-finite data");
  }
};

/// M_f = max_i ||a_i||_2. f has no Lipschitz gradient on R^n.
class ExpSumOracle final : public SmoothOracle {
 public:
  explicit ExpSumOracle(ExpSumData data) : data_(std::move(data)) {
    data_.validate();
    mf_ = data_.exponents.rowwise().norm().maxCoeff();
  }

  Index dimension() const override { return data_.exponents.cols(); }
  double scl_constant() const override { return mf_; }
  std::string name() const override { return "expsum"; }
  bool has_dense_hessian() const override { return dimension() <= kMaxDenseHessianDim; }
  const ExpSumData& data() const noexcept { return data_; }

  double value(const Vector& x) const override {
    const Vector e = terms(x);
    return detail::check_finite(e.sum() + data_.linear.dot(x), "expsum value");
  }

  Vector gradient(const Vector& x) const override {
    const Vector e = terms(x);
    return detail::check_finite(Vector(data_.exponents.transpose() * e + data_.linear), "expsum gradient");
  }

  Vector hess_vec(const Vector& x, const Vector& v) const override {
    detail::require(v.size() == dimension(), "expsum hess_vec: dimension mismatch");
    const Vector e = terms(x);
    const Vector Av = data_.exponents * v;
    return detail::check_finite(Vector(data_.exponents.transpose() * e.cwiseProduct(Av)), "expsum hess_vec");
  }

  Matrix hess_dense(const Vector& x) const override {
    detail::require(has_dense_hessian(), "expsum: dimension too large for a dense Hessian");
    const Vector e = terms(x);
    return detail::check_finite(Matrix(data_.exponents.transpose() * e.asDiagonal() * data_.exponents),
                                "expsum hess_dense");
  }

 private:
  Vector terms(const Vector& x) const {
    detail::require(x.size() == dimension(), "expsum: dimension mismatch");
    const Vector e = (data_.exponents * x + data_.offsets).array().exp().matrix();
    return detail::check_finite(e, "expsum exp(<a_i, x> + b_i)");
  }

  ExpSumData data_;
  double mf_ = 0.0;
};

// ---------------------------------------------------------------------------
// Quadratic reference oracle
// ---------------------------------------------------------------------------

/// f(x) = 1/2 <Ax, x> - <b, x> with A symmetric PSD; M_f = 0.
class QuadraticOracle final : public SmoothOracle {
 public:
  QuadraticOracle(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    detail::require(A_.rows() == A_.cols() && A_.rows() > 0, "quadratic: A must be square");
    detail::require(b_.size() == A_.rows(), "quadratic: b dimension mismatch");
    detail::require(A_.allFinite() && b_.allFinite(), "quadratic: non-finite data");
    const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
    detail::require((A_ - A_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                    "quadratic: A is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A_, Eigen::EigenvaluesOnly);
    detail::require(es.eigenvalues().minCoeff() >= -1e-10 * scale, "quadratic: A is not positive semidefinite");
  }

  Index dimension() const override { return A_.rows(); }
  double scl_constant() const override { return 0.0; }
  std::string name() const override { return "quadratic"; }
  bool has_dense_hessian() const override { return true; }

  double value(const Vector& x) const override {
    detail::require(x.size() == dimension(), "quadratic: dimension mismatch");
    return 0.5 * x.dot(A_ * x) - b_.dot(x);
  }
  Vector gradient(const Vector& x) const override {
    detail::require(x.size() == dimension(), "quadratic: dimension mismatch");
    return A_ * x - b_;
  }
  Vector hess_vec(const Vector& /*x*/, const Vector& v) const override {
    detail::require(v.size() == dimension(), "quadratic: dimension mismatch");
    return A_ * v;
  }
  Matrix hess_dense(const Vector& /*x*/) const override { return A_; }

  const Matrix& matrix() const noexcept { return A_; }
  const Vector& rhs() const noexcept { return b_; }

 private:
  Matrix A_;
  Vector b_;
};

inline std::shared_ptr<const SmoothOracle> logistic_oracle(LogisticData data) {
  return std::make_shared<const LogisticOracle>(std::move(data));
}
inline std::shared_ptr<const SmoothOracle> multinomial_oracle(MultinomialData data) {
  return std::make_shared<const MultinomialOracle>(std::move(data));
}
inline std::shared_ptr<const SmoothOracle> expsum_oracle(ExpSumData data) {
  return std::make_shared<const ExpSumOracle>(std::move(data));
}
inline std::shared_ptr<const SmoothOracle> quadratic_oracle(Matrix A, Vector b) {
  return std::make_shared<const QuadraticOracle>(std::move(A), std::move(b));
}

}  // namespace sclopt
