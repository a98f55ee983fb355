// Random generators and comparison helpers shared by the tests.
#pragma once

#include "cpcp/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace cpcp::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = uniform(rng, lo, hi);
  return m;
}

// Symmetric, zero diagonal; each off-diagonal pair present with `density`.
inline Matrix random_affinity(Rng& rng, Index n, double density = 1.0) {
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < density) w(i, j) = w(j, i) = uniform(rng, 0.05, 1.0);
  // Keep every row connected through a ring.
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    if (w(i, j) == 0.0 && i != j) w(i, j) = w(j, i) = uniform(rng, 0.05, 1.0);
  }
  return w;
}

inline Vector random_simplex(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform(rng, 0.05, 1.0);
  return v / v.sum();
}

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline double relative_frobenius(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace cpcp::test
