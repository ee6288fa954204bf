#include "fedgraph/numerics/optimizer.hpp"

#include <cmath>
#include <string>

#include "fedgraph/errors.hpp"

namespace fedgraph::num {

void optimizer_step(std::vector<Mat>& params, const std::vector<Mat>& grads,
                    OptimizerState& state, const OptimizerConfig& config) {
  if (!(config.lr > 0.0))
    throw ParamError("optimizer_step: learning rate " +
                     std::to_string(config.lr) + " must be positive");
  if (params.size() != grads.size())
    throw ShapeError("optimizer_step: " + std::to_string(params.size()) +
                     " parameters but " + std::to_string(grads.size()) +
                     " gradients");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != grads[i].rows() ||
        params[i].cols() != grads[i].cols())
      throw ShapeError("optimizer_step: tensor " + std::to_string(i) +
                       " is " + std::to_string(params[i].rows()) + "x" +
                       std::to_string(params[i].cols()) + " but gradient is " +
                       std::to_string(grads[i].rows()) + "x" +
                       std::to_string(grads[i].cols()));
  }

  state.step += 1;
  if (config.kind == OptKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= config.lr * grads[i];
    return;
  }

  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Mat& p : params) {
      state.m.push_back(Mat::Zero(p.rows(), p.cols()));
      state.v.push_back(Mat::Zero(p.rows(), p.cols()));
    }
  }
  if (state.m.size() != params.size())
    throw ShapeError("optimizer_step: state holds " +
                     std::to_string(state.m.size()) + " moment tensors for " +
                     std::to_string(params.size()) + " parameters");

  double t = static_cast<double>(state.step);
  double bc1 = 1.0 - std::pow(config.beta1, t);
  double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] +
                 (1.0 - config.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= config.lr * (state.m[i].array() / bc1) /
                         ((state.v[i].array() / bc2).sqrt() + config.eps);
  }
}

}  // namespace fedgraph::num
