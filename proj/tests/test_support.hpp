#pragma once

// Test-side oracles kept deliberately independent of the library code they
// check: plain loops, naive summation formulas, and quadrature.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fedgraph/numerics/tape.hpp"
#include "fedgraph/rng.hpp"
#include "fedgraph/types.hpp"

namespace ts {

using fedgraph::Index;
using fedgraph::Mat;
using fedgraph::Rng;
using fedgraph::Vec;

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

inline Mat random_matrix(Rng& rng, Index rows, Index cols,
                         double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

// Triple-loop product, no Eigen arithmetic involved.
inline Mat naive_matmul(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

// Orthonormal DCT-II coefficient k as a direct cosine sum.
inline double naive_dct_coeff(const Vec& signal, Index k) {
  const double pi = 3.14159265358979323846;
  double n = static_cast<double>(signal.size());
  double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
  double acc = 0.0;
  for (Index i = 0; i < signal.size(); ++i)
    acc += signal(i) *
           std::cos(pi * (2.0 * static_cast<double>(i) + 1.0) *
                    static_cast<double>(k) / (2.0 * n));
  return scale * acc;
}

// A differentiable scalar expression: receives the ids of the registered
// parameters (one per input matrix, in order) and returns a 1 x 1 loss slot.
using BuildFn = std::function<fedgraph::num::Tape::Id(
    fedgraph::num::Tape&, const std::vector<fedgraph::num::Tape::Id>&)>;

inline double eval_loss(const std::vector<Mat>& inputs, const BuildFn& build) {
  fedgraph::num::Tape tape;
  std::vector<fedgraph::num::Tape::Id> ids;
  ids.reserve(inputs.size());
  for (const Mat& m : inputs) ids.push_back(tape.param(m));
  return tape.scalar_value(build(tape, ids));
}

inline std::vector<Mat> tape_gradients(const std::vector<Mat>& inputs,
                                       const BuildFn& build) {
  fedgraph::num::Tape tape;
  std::vector<fedgraph::num::Tape::Id> ids;
  ids.reserve(inputs.size());
  for (const Mat& m : inputs) ids.push_back(tape.param(m));
  return tape.backward(build(tape, ids));
}

// Largest relative mismatch between reverse-mode gradients and central
// finite differences across every entry of every input.
inline double max_fd_error(const std::vector<Mat>& inputs,
                           const BuildFn& build, double h = 1e-5) {
  std::vector<Mat> grads = tape_gradients(inputs, build);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (Index r = 0; r < inputs[k].rows(); ++r) {
      for (Index c = 0; c < inputs[k].cols(); ++c) {
        std::vector<Mat> plus = inputs;
        std::vector<Mat> minus = inputs;
        plus[k](r, c) += h;
        minus[k](r, c) -= h;
        double fd = (eval_loss(plus, build) - eval_loss(minus, build)) /
                    (2.0 * h);
        double ad = grads[k](r, c);
        double err =
            std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6});
        worst = std::max(worst, err);
      }
    }
  }
  return worst;
}

// Renyi divergence D_alpha(Q || P) for Q = (1-q) N(0,s^2) + q N(1,s^2) and
// P = N(0,s^2), by Simpson quadrature of the log-space integrand. This is
// the quantity the subsampled-Gaussian accountant bounds, computed without
// the binomial expansion the accountant uses.
inline double renyi_mixture_oracle(double q, double sigma, int alpha,
                                   int intervals = 200000) {
  double s2 = sigma * sigma;
  auto log_integrand = [&](double x) {
    double lp = -x * x / (2.0 * s2);
    if (q >= 1.0) {
      double lq = -(x - 1.0) * (x - 1.0) / (2.0 * s2);
      return alpha * lq + (1.0 - alpha) * lp;
    }
    double la = std::log1p(-q) + lp;
    double lb = std::log(q) - (x - 1.0) * (x - 1.0) / (2.0 * s2);
    double hi = std::max(la, lb);
    double lq = hi + std::log1p(std::exp(-std::abs(la - lb)));
    return alpha * lq + (1.0 - alpha) * lp;
  };
  double lo = -40.0 * sigma - 8.0;
  double hi = static_cast<double>(alpha) + 40.0 * sigma + 8.0;
  int n = intervals % 2 == 0 ? intervals : intervals + 1;
  double h = (hi - lo) / n;
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  double peak = -1e300;
  for (int i = 0; i <= n; ++i) {
    logs[static_cast<std::size_t>(i)] = log_integrand(lo + h * i);
    peak = std::max(peak, logs[static_cast<std::size_t>(i)]);
  }
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::exp(logs[static_cast<std::size_t>(i)] - peak);
  }
  double log_integral = peak + std::log(acc * h / 3.0) -
                        std::log(sigma * std::sqrt(2.0 * 3.14159265358979323846));
  return std::max(0.0, log_integral / (static_cast<double>(alpha) - 1.0));
}

}  // namespace ts
