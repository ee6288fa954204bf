#pragma once

#include <functional>
#include <vector>

#include "fedgraph/rng.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::num {

// Reverse-mode autodiff over a linear tape of matrix operations.
//
// Leaves are registered as constants or parameters; every operation records
// a value slot plus a closure that propagates the output gradient back into
// its inputs. backward() runs the closures in reverse, returns one
// accumulated gradient per parameter in registration order, and resets the
// tape for the next forward pass.
class Tape {
 public:
  using Id = int;

  Id constant(Mat value);
  Id param(Mat value);

  Id matmul(Id a, Id b);
  Id add(Id a, Id b);
  // Broadcasts a 1 x C row over every row of an N x C matrix.
  Id add_row(Id x, Id row);
  Id relu(Id x);
  Id layer_norm(Id x, Id gain, Id bias);
  // Identity when training is false or rate is zero; otherwise applies a
  // fresh inverted-dropout mask drawn from rng.
  Id dropout(Id x, double rate, bool training, Rng& rng);
  Id softmax_rows(Id x);
  Id concat_cols(const std::vector<Id>& parts);
  Id slice_cols(Id x, Index start, Index width);
  // Multiplies row i of x by weights(i, 0).
  Id scale_cols(Id weights, Id x);
  Id gather_rows(Id x, std::vector<Index> rows);
  // Mean of -log softmax(logits)[i, labels[i]]; returns a 1 x 1 slot.
  Id softmax_cross_entropy(Id logits, const std::vector<int>& labels);
  // Mean squared difference over all entries; returns a 1 x 1 slot.
  Id mse(Id pred, Id target);

  const Mat& value(Id id) const;
  double scalar_value(Id id) const;
  Index num_params() const { return static_cast<Index>(params_.size()); }

  // Reverse pass from a scalar loss. Clears the tape afterwards; calling it
  // again without recording a new forward pass is an error.
  std::vector<Mat> backward(Id loss);

  void reset();

 private:
  struct Slot {
    Mat value;
    Mat grad;
    bool requires_grad = false;
  };

  Id push(Mat value, bool requires_grad);
  const Slot& at(Id id) const;
  Mat& grad(Id id) { return slots_[static_cast<std::size_t>(id)].grad; }
  void check_id(Id id) const;

  std::vector<Slot> slots_;
  std::vector<std::function<void()>> nodes_;
  std::vector<Id> params_;
};

}  // namespace fedgraph::num
