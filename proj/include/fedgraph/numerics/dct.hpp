#pragma once

#include <cmath>
#include <numbers>

#include "fedgraph/errors.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::num {

// Rows of the orthonormal DCT-II basis: row k holds
// s(k) * cos(pi * (2n + 1) * k / (2N)) with s(0) = sqrt(1/N) and
// s(k) = sqrt(2/N) for k > 0. With keep == n the matrix is orthogonal.
inline Mat dct_basis(Index n, Index keep) {
  if (n <= 0) throw ParamError("dct_basis: empty signal");
  if (keep <= 0 || keep > n)
    throw ParamError("dct_basis: keep " + std::to_string(keep) +
                     " outside [1, " + std::to_string(n) + "]");
  Mat basis(keep, n);
  double s0 = std::sqrt(1.0 / static_cast<double>(n));
  double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (Index k = 0; k < keep; ++k) {
    double scale = k == 0 ? s0 : sk;
    for (Index i = 0; i < n; ++i)
      basis(k, i) = scale * std::cos(std::numbers::pi *
                                     (2.0 * static_cast<double>(i) + 1.0) *
                                     static_cast<double>(k) /
                                     (2.0 * static_cast<double>(n)));
  }
  return basis;
}

// First `keep` coefficients of the orthonormal DCT-II of `signal`.
inline Vec dct_1d(const Vec& signal, Index keep) {
  return dct_basis(signal.size(), keep) * signal;
}

// Inverse of the full orthonormal transform (transpose of the basis).
inline Vec idct_1d(const Vec& coeffs) {
  return dct_basis(coeffs.size(), coeffs.size()).transpose() * coeffs;
}

}  // namespace fedgraph::num
