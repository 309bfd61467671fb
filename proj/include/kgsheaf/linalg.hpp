// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/common.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace kgsheaf {

/// Minimum-norm solves against a symmetric PSD matrix. Eigenvalues at or
/// below cutoff * lambda_max are treated as zero (Moore-Penrose inverse).
class PsdSolver {
 public:
  explicit PsdSolver(const Matrix& a, double cutoff = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    q_ = es.eigenvectors();
    const Vector& lam = es.eigenvalues();
    const double lmax = lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0;
    inv_.resize(lam.size());
    rank_ = 0;
    for (Index k = 0; k < lam.size(); ++k) {
      if (lmax > 0.0 && lam(k) > cutoff * lmax) {
        inv_(k) = 1.0 / lam(k);
        ++rank_;
      } else {
        inv_(k) = 0.0;
      }
    }
  }

  Matrix solve(const Matrix& b) const { return q_ * (inv_.asDiagonal() * (q_.transpose() * b)); }
  Vector solve(const Vector& b) const { return q_ * (inv_.asDiagonal() * (q_.transpose() * b)); }
  Matrix pseudo_inverse() const { return q_ * inv_.asDiagonal() * q_.transpose(); }
  Index rank() const { return rank_; }
  bool invertible() const { return rank_ == q_.rows(); }

 private:
  Matrix q_;
  Vector inv_;
  Index rank_ = 0;
};

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
template <typename Apply>
double power_iteration(Apply&& apply, Index n, Index iters = 200, std::uint64_t seed = 7) {
  if (n == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  v.normalize();
  double lambda = 0.0;
  for (Index k = 0; k < iters; ++k) {
    Vector w = apply(v);
    lambda = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
  }
  return lambda;
}

}  // namespace kgsheaf
