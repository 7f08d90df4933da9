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

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>

namespace sclopt {

/// v -> H v for a symmetric operator H.
using LinearOperator = std::function<Vector(const Vector&)>;

struct ExtremeEigs {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int restarts = 0;
};

namespace detail {

inline Vector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  const double nv = v.norm();
  return nv > 0.0 ? Vector(v / nv) : Vector(Vector::Unit(n, 0));
}

struct PowerResult {
  double eigenvalue = 0.0;
  int restarts = 0;
};

// Dominant eigenvalue of a symmetric PSD operator. A zero image is a
// breakdown; after max_restarts fresh starts the operator is treated as
// annihilating generic vectors and 0 is returned.
inline PowerResult dominant_eigenvalue(const LinearOperator& op, Index n, int iters,
                                       std::mt19937_64& rng, int max_restarts = 5) {
  PowerResult out;
  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    Vector v = random_unit(n, rng);
    double theta = 0.0;
    bool broke_down = false;
    for (int it = 0; it < std::max(iters, 1); ++it) {
      Vector w = op(v);
      theta = v.dot(w);
      const double nw = w.norm();
      if (!(nw > 0.0) || !std::isfinite(nw)) {
        broke_down = true;
        break;
      }
      // ||Hv - theta v|| small: v is an eigenvector to working precision.
      if ((w - theta * v).norm() <= 1e-14 * std::abs(theta)) break;
      v = w / nw;
    }
    if (!broke_down) {
      out.eigenvalue = theta;
      return out;
    }
    ++out.restarts;
  }
  out.eigenvalue = 0.0;
  return out;
}

}  // namespace detail

/**
 * Extreme eigenvalues of a symmetric positive semidefinite operator.
 *
 * sigma_max comes from power iteration on H, sigma_min from power iteration
 * on the shifted operator sigma_max I - H. Both are Rayleigh quotients, so
 * sigma_max is never overestimated and sigma_min never underestimated.
 */
inline ExtremeEigs extreme_eigs(const LinearOperator& op, Index n, int iters,
                                std::uint64_t seed = 0x5c10u) {
  detail::require(n > 0, "extreme_eigs: dimension must be positive");
  detail::require(iters > 0, "extreme_eigs: iteration count must be positive");
  std::mt19937_64 rng(seed);
  ExtremeEigs out;
  const auto top = detail::dominant_eigenvalue(op, n, iters, rng);
  out.sigma_max = top.eigenvalue;
  out.restarts = top.restarts;
  const double shift = out.sigma_max;
  const LinearOperator shifted = [&](const Vector& v) -> Vector { return shift * v - op(v); };
  const auto bottom = detail::dominant_eigenvalue(shifted, n, iters, rng);
  out.restarts += bottom.restarts;
  out.sigma_min = std::clamp(shift - bottom.eigenvalue, 0.0, shift);
  return out;
}

struct RitzBounds {
  double min = 0.0;
  double max = 0.0;
  int steps = 0;
};

/// Extreme Ritz values after `iters` Lanczos steps from a seeded random start
/// (full reorthogonalization; stops early on an invariant subspace).
inline RitzBounds lanczos_extreme(const LinearOperator& op, Index n, int iters,
                                  std::uint64_t seed = 0x1a2c05u) {
  detail::require(n > 0 && iters > 0, "lanczos_extreme: bad arguments");
  std::mt19937_64 rng(seed);
  const int k_max = static_cast<int>(std::min<Index>(iters, n));
  Matrix Q(n, k_max);
  Vector alpha(k_max), beta(k_max);
  Q.col(0) = detail::random_unit(n, rng);
  int k = 0;
  for (; k < k_max; ++k) {
    Vector w = op(Q.col(k));
    alpha[k] = Q.col(k).dot(w);
    w -= alpha[k] * Q.col(k);
    if (k > 0) w -= beta[k - 1] * Q.col(k - 1);
    for (int pass = 0; pass < 2; ++pass)
      w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    beta[k] = w.norm();
    if (k + 1 == k_max || beta[k] <= 1e-13 * std::max(1.0, std::abs(alpha[k]))) {
      ++k;
      break;
    }
    Q.col(k + 1) = w / beta[k];
  }
  Matrix T = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), k};
}

}  // namespace sclopt
