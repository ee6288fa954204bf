#pragma once

#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::num {

enum class OptKind { Sgd, Adam };

struct OptimizerConfig {
  OptKind kind = OptKind::Adam;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers for Adam, sized lazily on the first step.
// SGD leaves the buffers empty. `step` counts completed updates and drives
// the bias correction.
struct OptimizerState {
  long step = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;
};

// Applies one in-place update to every parameter tensor.
void optimizer_step(std::vector<Mat>& params, const std::vector<Mat>& grads,
                    OptimizerState& state, const OptimizerConfig& config);

}  // namespace fedgraph::num
