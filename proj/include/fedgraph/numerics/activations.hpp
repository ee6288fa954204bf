#pragma once

#include <cmath>
#include <vector>

#include "fedgraph/errors.hpp"
#include "fedgraph/rng.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::num {

inline constexpr double kLayerNormEps = 1e-5;

template <typename Derived>
MatX<typename Derived::Scalar> relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

// Row-wise softmax with max subtraction, stable for large logits.
template <typename Derived>
MatX<typename Derived::Scalar> softmax_rows(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  MatX<Scalar> out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    Scalar m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

// Per-row log softmax; always finite for finite input.
template <typename Derived>
MatX<typename Derived::Scalar> log_softmax_rows(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  MatX<Scalar> out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    Scalar m = x.row(i).maxCoeff();
    Scalar lse = std::log((x.row(i).array() - m).exp().sum()) + m;
    out.row(i) = x.row(i).array() - lse;
  }
  return out;
}

// Mean negative log-likelihood of the true labels under row-wise softmax.
inline double cross_entropy(const Mat& logits, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != logits.rows())
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(logits.rows()) +
                     " logit rows");
  if (logits.rows() == 0) throw ParamError("cross_entropy: empty batch");
  Mat logp = log_softmax_rows(logits);
  double total = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols())
      throw IndexError("cross_entropy: label " + std::to_string(y) +
                       " outside [0, " + std::to_string(logits.cols()) + ")");
    total -= logp(i, y);
  }
  return total / static_cast<double>(logits.rows());
}

// Normalizes each row to zero mean and unit variance (population variance,
// epsilon inside the square root), then applies a learned per-column gain
// and bias.
inline Mat layer_norm_rows(const Mat& x, const RowVec& gain,
                           const RowVec& bias) {
  if (gain.cols() != x.cols() || bias.cols() != x.cols())
    throw ShapeError("layer_norm_rows: gain/bias of width " +
                     std::to_string(gain.cols()) + "/" +
                     std::to_string(bias.cols()) + " for input of width " +
                     std::to_string(x.cols()));
  Mat out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    double mean = x.row(i).mean();
    double var = (x.row(i).array() - mean).square().mean();
    out.row(i) =
        ((x.row(i).array() - mean) / std::sqrt(var + kLayerNormEps)) *
            gain.array() +
        bias.array();
  }
  return out;
}

// Inverted-dropout mask: entries are 1/(1-rate) with probability (1-rate)
// and 0 otherwise, so the expectation of mask.*x equals x.
inline Mat dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ParamError("dropout: rate " + std::to_string(rate) +
                     " outside [0, 1)");
  Mat mask(rows, cols);
  if (rate == 0.0) {
    mask.setOnes();
    return mask;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double scale = 1.0 / (1.0 - rate);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      mask(i, j) = unif(rng) >= rate ? scale : 0.0;
  return mask;
}

inline Mat dropout(const Mat& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ParamError("dropout: rate " + std::to_string(rate) +
                     " outside [0, 1)");
  if (!training || rate == 0.0) return x;
  return dropout_mask(x.rows(), x.cols(), rate, rng).cwiseProduct(x);
}

}  // namespace fedgraph::num
