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
#include "sclopt/libsvm.hpp"
#include "sclopt/oracles.hpp"
#include "sclopt/prox.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace sclopt {

/// Exponential-sum data with every entry drawn from N(0, 1) / sqrt(n).
inline ExpSumData synth_gp_data(Index n, Index m, std::uint64_t seed) {
  detail::require(n >= 1 && m >= 1, "synth_gp_data: n and m must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  ExpSumData d;
  d.exponents.resize(m, n);
  d.offsets.resize(m);
  d.linear.resize(n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) d.exponents(i, j) = s * normal(rng);
  for (Index i = 0; i < m; ++i) d.offsets[i] = s * normal(rng);
  for (Index j = 0; j < n; ++j) d.linear[j] = s * normal(rng);
  return d;
}

/// sum_i exp(<a_i, x> + b_i) + <c, x> + ||x||_1.
inline ProblemInstance synth_gp_instance(Index n, Index m, std::uint64_t seed) {
  return ProblemInstance(expsum_oracle(synth_gp_data(n, m, seed)), std::make_shared<L1Norm>(n, 1.0));
}

/// N samples with N(0, feature_scale^2) features (feature_scale defaults to
/// p^{-1/2}); labels are drawn from the logistic model of a planted vector
/// whose odd coordinates are zero.
inline LogisticData synth_logistic_data(Index N, Index p, std::uint64_t seed, bool include_bias = false,
                                        double feature_scale = 0.0) {
  detail::require(N >= 1 && p >= 1, "synth_logistic_data: N and p must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector planted(p);
  for (Index i = 0; i < p; ++i) planted[i] = (i % 2 == 0) ? 2.0 * normal(rng) : 0.0;
  const double bias = include_bias ? 0.5 : 0.0;
  const double s = feature_scale > 0.0 ? feature_scale : 1.0 / std::sqrt(static_cast<double>(p));
  planted /= s * std::sqrt(static_cast<double>(p));
  std::vector<Eigen::Triplet<double>> trip;
  LogisticData d;
  d.labels.resize(N);
  for (Index j = 0; j < N; ++j) {
    double margin = bias;
    for (Index i = 0; i < p; ++i) {
      const double w = s * normal(rng);
      trip.emplace_back(j, i, w);
      margin += w * planted[i];
    }
    d.labels[j] = unif(rng) < detail::sigmoid(margin) ? 1.0 : -1.0;
  }
  d.samples.resize(N, p);
  d.samples.setFromTriplets(trip.begin(), trip.end());
  d.samples.makeCompressed();
  d.include_bias = include_bias;
  return d;
}

/// rho N^{-1/2} ||x||_1 over the feature coordinates; the bias is unpenalized.
inline std::shared_ptr<const NonsmoothTerm> logistic_l1_term(const LogisticData& d, double rho) {
  detail::require(rho >= 0.0, "logistic_l1_term: rho must be nonnegative");
  Vector w = Vector::Constant(d.dimension(), rho / std::sqrt(static_cast<double>(d.sample_count())));
  if (d.include_bias) w[w.size() - 1] = 0.0;
  return std::make_shared<L1Norm>(std::move(w));
}

inline ProblemInstance logistic_l1_problem(LogisticData d, double rho) {
  auto g = logistic_l1_term(d, rho);
  return ProblemInstance(logistic_oracle(std::move(d)), std::move(g));
}

/// m explicit classes plus the reference class; labels drawn from the softmax
/// of a planted m x p matrix.
inline MultinomialData synth_multinomial_data(Index N, Index p, Index m, std::uint64_t seed) {
  detail::require(N >= 1 && p >= 1 && m >= 1, "synth_multinomial_data: sizes must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Matrix planted = Matrix::NullaryExpr(m, p, [&]() { return 2.0 * normal(rng); });
  const double s = 1.0 / std::sqrt(static_cast<double>(p));
  std::vector<Eigen::Triplet<double>> trip;
  MultinomialData d;
  d.labels = Matrix::Zero(N, m);
  for (Index j = 0; j < N; ++j) {
    Vector w(p);
    for (Index i = 0; i < p; ++i) {
      w[i] = s * normal(rng);
      trip.emplace_back(j, i, w[i]);
    }
    Vector z(m + 1);
    z.head(m) = planted * w;
    z[m] = 0.0;
    const Vector e = (z.array() - z.maxCoeff()).exp();
    double u = unif(rng) * e.sum();
    Index cls = m;
    for (Index i = 0; i <= m; ++i) {
      u -= e[i];
      if (u <= 0.0) {
        cls = i;
        break;
      }
    }
    if (cls < m) d.labels(j, cls) = 1.0;
  }
  d.samples.resize(N, p);
  d.samples.setFromTriplets(trip.begin(), trip.end());
  d.samples.makeCompressed();
  return d;
}

/// LIBSVM view of logistic data (bias coordinate not included).
inline SparseDataset to_dataset(const LogisticData& d) {
  SparseDataset ds;
  ds.feature_count = d.feature_count();
  for (Index j = 0; j < d.samples.rows(); ++j) {
    SparseDataset::Row row;
    for (SparseMatrix::InnerIterator it(d.samples, j); it; ++it)
      if (it.value() != 0.0) row.emplace_back(it.col(), it.value());
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(d.labels[j]);
  }
  return ds;
}

}  // namespace sclopt
