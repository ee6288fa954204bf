#include "fedgraph/numerics/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fedgraph/errors.hpp"
#include "fedgraph/numerics/activations.hpp"

namespace fedgraph::num {

namespace {

std::string shape_of(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Tape::Id Tape::push(Mat value, bool requires_grad) {
  slots_.push_back(Slot{std::move(value), Mat(), requires_grad});
  return static_cast<Id>(slots_.size() - 1);
}

void Tape::check_id(Id id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= slots_.size())
    throw IndexError("tape: slot " + std::to_string(id) + " out of range");
}

const Tape::Slot& Tape::at(Id id) const {
  check_id(id);
  return slots_[static_cast<std::size_t>(id)];
}

Tape::Id Tape::constant(Mat value) { return push(std::move(value), false); }

Tape::Id Tape::param(Mat value) {
  Id id = push(std::move(value), true);
  params_.push_back(id);
  return id;
}

const Mat& Tape::value(Id id) const { return at(id).value; }

double Tape::scalar_value(Id id) const {
  const Mat& v = at(id).value;
  if (v.rows() != 1 || v.cols() != 1)
    throw ShapeError("tape: slot holds " + shape_of(v) + ", not a scalar");
  return v(0, 0);
}

Tape::Id Tape::matmul(Id a, Id b) {
  const Mat& va = at(a).value;
  const Mat& vb = at(b).value;
  if (va.cols() != vb.rows())
    throw ShapeError("matmul: " + shape_of(va) + " * " + shape_of(vb));
  Id out = push(va * vb, false);
  nodes_.push_back([this, a, b, out] {
    const Mat& g = grad(out);
    grad(a).noalias() += g * at(b).value.transpose();
    grad(b).noalias() += at(a).value.transpose() * g;
  });
  return out;
}

Tape::Id Tape::add(Id a, Id b) {
  const Mat& va = at(a).value;
  const Mat& vb = at(b).value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols())
    throw ShapeError("add: " + shape_of(va) + " + " + shape_of(vb));
  Id out = push(va + vb, false);
  nodes_.push_back([this, a, b, out] {
    grad(a) += grad(out);
    grad(b) += grad(out);
  });
  return out;
}

Tape::Id Tape::add_row(Id x, Id row) {
  const Mat& vx = at(x).value;
  const Mat& vr = at(row).value;
  if (vr.rows() != 1 || vr.cols() != vx.cols())
    throw ShapeError("add_row: row " + shape_of(vr) + " against " +
                     shape_of(vx));
  Id out = push(vx.rowwise() + vr.row(0), false);
  nodes_.push_back([this, x, row, out] {
    grad(x) += grad(out);
    grad(row).row(0) += grad(out).colwise().sum();
  });
  return out;
}

Tape::Id Tape::relu(Id x) {
  const Mat& vx = at(x).value;
  Id out = push(vx.cwiseMax(0.0), false);
  nodes_.push_back([this, x, out] {
    grad(x).array() +=
        grad(out).array() * (at(x).value.array() > 0.0).cast<double>();
  });
  return out;
}

Tape::Id Tape::layer_norm(Id x, Id gain, Id bias) {
  const Mat& vx = at(x).value;
  const Mat& vg = at(gain).value;
  const Mat& vb = at(bias).value;
  if (vg.rows() != 1 || vg.cols() != vx.cols() || vb.rows() != 1 ||
      vb.cols() != vx.cols())
    throw ShapeError("layer_norm: gain " + shape_of(vg) + ", bias " +
                     shape_of(vb) + " against " + shape_of(vx));
  Index n = vx.rows(), c = vx.cols();
  Mat normalized(n, c);
  Vec inv_std(n);
  for (Index i = 0; i < n; ++i) {
    double mean = vx.row(i).mean();
    double var = (vx.row(i).array() - mean).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + kLayerNormEps);
    normalized.row(i) = (vx.row(i).array() - mean) * inv_std(i);
  }
  Id out = push((normalized.array().rowwise() * vg.row(0).array()).rowwise() +
                    vb.row(0).array(),
                false);
  nodes_.push_back([this, x, gain, bias, out, normalized, inv_std] {
    const Mat& g = grad(out);
    const Mat& vg2 = at(gain).value;
    grad(bias).row(0) += g.colwise().sum();
    grad(gain).row(0) +=
        (g.array() * normalized.array()).colwise().sum().matrix();
    Mat dnorm = g.array().rowwise() * vg2.row(0).array();
    Mat& gx = grad(x);
    for (Index i = 0; i < dnorm.rows(); ++i) {
      double mean_d = dnorm.row(i).mean();
      double mean_dn = (dnorm.row(i).array() * normalized.row(i).array()).mean();
      gx.row(i).array() += inv_std(i) * (dnorm.row(i).array() - mean_d -
                                         normalized.row(i).array() * mean_dn);
    }
  });
  return out;
}

Tape::Id Tape::dropout(Id x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ParamError("dropout: rate " + std::to_string(rate) +
                     " outside [0, 1)");
  if (!training || rate == 0.0) return x;
  const Mat& vx = at(x).value;
  Mat mask = dropout_mask(vx.rows(), vx.cols(), rate, rng);
  Id out = push(vx.cwiseProduct(mask), false);
  nodes_.push_back([this, x, out, mask] {
    grad(x).array() += grad(out).array() * mask.array();
  });
  return out;
}

Tape::Id Tape::softmax_rows(Id x) {
  Mat probs = num::softmax_rows(at(x).value);
  Id out = push(probs, false);
  nodes_.push_back([this, x, out, probs] {
    const Mat& g = grad(out);
    Mat& gx = grad(x);
    for (Index i = 0; i < probs.rows(); ++i) {
      double dot = g.row(i).dot(probs.row(i));
      gx.row(i).array() +=
          probs.row(i).array() * (g.row(i).array() - dot);
    }
  });
  return out;
}

Tape::Id Tape::concat_cols(const std::vector<Id>& parts) {
  if (parts.empty()) throw ParamError("concat_cols: no inputs");
  Index rows = at(parts[0]).value.rows();
  Index cols = 0;
  for (Id p : parts) {
    if (at(p).value.rows() != rows)
      throw ShapeError("concat_cols: row count " +
                       std::to_string(at(p).value.rows()) + " != " +
                       std::to_string(rows));
    cols += at(p).value.cols();
  }
  Mat joined(rows, cols);
  Index offset = 0;
  for (Id p : parts) {
    const Mat& v = at(p).value;
    joined.middleCols(offset, v.cols()) = v;
    offset += v.cols();
  }
  Id out = push(std::move(joined), false);
  std::vector<Id> ids = parts;
  nodes_.push_back([this, ids, out] {
    Index off = 0;
    for (Id p : ids) {
      Index w = at(p).value.cols();
      grad(p) += grad(out).middleCols(off, w);
      off += w;
    }
  });
  return out;
}

Tape::Id Tape::slice_cols(Id x, Index start, Index width) {
  const Mat& vx = at(x).value;
  if (start < 0 || width <= 0 || start + width > vx.cols())
    throw IndexError("slice_cols: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + width) + ") of " +
                     shape_of(vx));
  Id out = push(vx.middleCols(start, width), false);
  nodes_.push_back([this, x, start, width, out] {
    grad(x).middleCols(start, width) += grad(out);
  });
  return out;
}

Tape::Id Tape::scale_cols(Id weights, Id x) {
  const Mat& vw = at(weights).value;
  const Mat& vx = at(x).value;
  if (vw.cols() != 1 || vw.rows() != vx.rows())
    throw ShapeError("scale_cols: weights " + shape_of(vw) + " against " +
                     shape_of(vx));
  Id out = push(vx.array().colwise() * vw.col(0).array(), false);
  nodes_.push_back([this, weights, x, out] {
    const Mat& g = grad(out);
    grad(weights).col(0) +=
        (g.array() * at(x).value.array()).rowwise().sum().matrix();
    grad(x).array() += g.array().colwise() * at(weights).value.col(0).array();
  });
  return out;
}

Tape::Id Tape::gather_rows(Id x, std::vector<Index> rows) {
  const Mat& vx = at(x).value;
  if (rows.empty()) throw ParamError("gather_rows: empty index list");
  Mat picked(static_cast<Index>(rows.size()), vx.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= vx.rows())
      throw IndexError("gather_rows: row " + std::to_string(rows[i]) +
                       " outside [0, " + std::to_string(vx.rows()) + ")");
    picked.row(static_cast<Index>(i)) = vx.row(rows[i]);
  }
  Id out = push(std::move(picked), false);
  nodes_.push_back([this, x, rows = std::move(rows), out] {
    const Mat& g = grad(out);
    Mat& gx = grad(x);
    for (std::size_t i = 0; i < rows.size(); ++i)
      gx.row(rows[i]) += g.row(static_cast<Index>(i));
  });
  return out;
}

Tape::Id Tape::softmax_cross_entropy(Id logits,
                                     const std::vector<int>& labels) {
  const Mat& vl = at(logits).value;
  if (static_cast<Index>(labels.size()) != vl.rows())
    throw ShapeError("softmax_cross_entropy: " +
                     std::to_string(labels.size()) + " labels for " +
                     std::to_string(vl.rows()) + " logit rows");
  double loss = cross_entropy(vl, labels);
  Mat probs = num::softmax_rows(vl);
  Id out = push(Mat::Constant(1, 1, loss), false);
  nodes_.push_back([this, logits, labels, probs, out] {
    double g = grad(out)(0, 0);
    double inv_n = 1.0 / static_cast<double>(probs.rows());
    Mat d = probs;
    for (Index i = 0; i < d.rows(); ++i)
      d(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    grad(logits) += (g * inv_n) * d;
  });
  return out;
}

Tape::Id Tape::mse(Id pred, Id target) {
  const Mat& vp = at(pred).value;
  const Mat& vt = at(target).value;
  if (vp.rows() != vt.rows() || vp.cols() != vt.cols())
    throw ShapeError("mse: " + shape_of(vp) + " vs " + shape_of(vt));
  if (vp.size() == 0) throw ParamError("mse: empty input");
  double loss = (vp - vt).squaredNorm() / static_cast<double>(vp.size());
  Id out = push(Mat::Constant(1, 1, loss), false);
  nodes_.push_back([this, pred, target, out] {
    double g = grad(out)(0, 0);
    double scale = 2.0 / static_cast<double>(at(pred).value.size());
    Mat d = (g * scale) * (at(pred).value - at(target).value);
    grad(pred) += d;
    grad(target) -= d;
  });
  return out;
}

std::vector<Mat> Tape::backward(Id loss) {
  if (nodes_.empty())
    throw StateError("backward: no forward operations recorded");
  check_id(loss);
  const Mat& vl = slots_[static_cast<std::size_t>(loss)].value;
  if (vl.rows() != 1 || vl.cols() != 1)
    throw ShapeError("backward: loss slot is " + shape_of(vl) +
                     ", expected 1x1");
  for (Slot& s : slots_) s.grad = Mat::Zero(s.value.rows(), s.value.cols());
  grad(loss)(0, 0) = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  std::vector<Mat> out;
  out.reserve(params_.size());
  for (Id p : params_) out.push_back(std::move(grad(p)));
  reset();
  return out;
}

void Tape::reset() {
  slots_.clear();
  nodes_.clear();
  params_.clear();
}

}  // namespace fedgraph::num
