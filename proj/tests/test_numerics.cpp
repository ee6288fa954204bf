#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fedgraph/numerics/activations.hpp"
#include "fedgraph/numerics/dct.hpp"
#include "fedgraph/numerics/optimizer.hpp"
#include "fedgraph/numerics/tape.hpp"
#include "test_support.hpp"

using namespace fedgraph;
using num::Tape;

namespace {
constexpr double kGradTol = 1e-4;  // central differences, h = 1e-5
constexpr double kTight = 1e-12;
}  // namespace

TEST_CASE("matmul matches a triple-loop product") {
  Rng rng(7);
  Mat a = ts::random_matrix(rng, 7, 5);
  Mat b = ts::random_matrix(rng, 5, 4);
  Tape tape;
  Mat got = tape.value(tape.matmul(tape.constant(a), tape.constant(b)));
  Mat want = ts::naive_matmul(a, b);
  CHECK((got - want).cwiseAbs().maxCoeff() < kTight);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  Tape tape;
  Tape::Id a = tape.constant(Mat::Zero(2, 3));
  Tape::Id b = tape.constant(Mat::Zero(4, 2));
  CHECK_THROWS_AS(tape.matmul(a, b), ShapeError);
}

TEST_CASE("gradients of matmul, add, and add_row match finite differences") {
  Rng rng(11);
  std::vector<Mat> inputs = {ts::random_matrix(rng, 4, 3),
                             ts::random_matrix(rng, 3, 5),
                             ts::random_matrix(rng, 4, 5),
                             ts::random_matrix(rng, 1, 5)};
  auto build = [](Tape& t, const std::vector<Tape::Id>& p) {
    Tape::Id z = t.add_row(t.add(t.matmul(p[0], p[1]), p[2]), p[3]);
    return t.mse(z, t.constant(Mat::Zero(4, 5)));
  };
  CHECK(ts::max_fd_error(inputs, build) < kGradTol);
}

TEST_CASE("gradients of relu match finite differences away from the kink") {
  Rng rng(13);
  Mat x = ts::random_matrix(rng, 5, 4);
  // Nudge entries off zero so the subgradient choice cannot bite.
  x = x.unaryExpr([](double v) { return std::abs(v) < 0.05 ? v + 0.1 : v; });
  auto build = [](Tape& t, const std::vector<Tape::Id>& p) {
    return t.mse(t.relu(p[0]), t.constant(Mat::Ones(5, 4)));
  };
  CHECK(ts::max_fd_error({x}, build) < kGradTol);
}

TEST_CASE("gradients of layer_norm match finite differences") {
  Rng rng(17);
  std::vector<Mat> inputs = {ts::random_matrix(rng, 4, 6),
                             ts::random_matrix(rng, 1, 6),
                             ts::random_matrix(rng, 1, 6)};
  auto build = [](Tape& t, const std::vector<Tape::Id>& p) {
    Tape::Id z = t.layer_norm(p[0], p[1], p[2]);
    return t.mse(z, t.constant(Mat::Ones(4, 6)));
  };
  CHECK(ts::max_fd_error(inputs, build) < kGradTol);
}

TEST_CASE("gradients of softmax_rows match finite differences") {
  Rng rng(19);
  Mat x = ts::random_matrix(rng, 3, 5);
  Mat target = ts::random_matrix(rng, 3, 5);
  auto build = [target](Tape& t, const std::vector<Tape::Id>& p) {
    return t.mse(t.softmax_rows(p[0]), t.constant(target));
  };
  CHECK(ts::max_fd_error({x}, build) < kGradTol);
}

TEST_CASE("gradients of concat, slice, scale_cols, gather_rows check out") {
  Rng rng(23);
  std::vector<Mat> inputs = {ts::random_matrix(rng, 4, 2),
                             ts::random_matrix(rng, 4, 3),
                             ts::random_matrix(rng, 4, 1)};
  auto build = [](Tape& t, const std::vector<Tape::Id>& p) {
    Tape::Id cat = t.concat_cols({p[0], p[1]});
    Tape::Id part = t.slice_cols(cat, 1, 3);
    Tape::Id scaled = t.scale_cols(p[2], part);
    // Duplicate row index: the gather gradient must accumulate.
    Tape::Id picked = t.gather_rows(scaled, {0, 2, 2, 3});
    return t.mse(picked, t.constant(Mat::Zero(4, 3)));
  };
  CHECK(ts::max_fd_error(inputs, build) < kGradTol);
}

TEST_CASE("gradients of softmax_cross_entropy match finite differences") {
  Rng rng(29);
  Mat logits = ts::random_matrix(rng, 6, 4);
  std::vector<int> labels = {0, 3, 1, 1, 2, 0};
  auto build = [labels](Tape& t, const std::vector<Tape::Id>& p) {
    return t.softmax_cross_entropy(p[0], labels);
  };
  CHECK(ts::max_fd_error({logits}, build) < kGradTol);

  Tape tape;
  double on_tape =
      tape.scalar_value(tape.softmax_cross_entropy(tape.param(logits), labels));
  CHECK(ts::rel_diff(on_tape, num::cross_entropy(logits, labels)) < kTight);
}

TEST_CASE("gradients of mse flow into both operands") {
  Rng rng(31);
  std::vector<Mat> inputs = {ts::random_matrix(rng, 3, 4),
                             ts::random_matrix(rng, 3, 4)};
  auto build = [](Tape& t, const std::vector<Tape::Id>& p) {
    return t.mse(p[0], p[1]);
  };
  CHECK(ts::max_fd_error(inputs, build) < kGradTol);
}

TEST_CASE("gradients of dropout with a fixed mask match finite differences") {
  Rng rng(37);
  Mat x = ts::random_matrix(rng, 5, 5);
  auto build = [](Tape& t, const std::vector<Tape::Id>& p) {
    Rng mask_rng(99);  // same mask on every evaluation
    Tape::Id z = t.dropout(p[0], 0.4, true, mask_rng);
    return t.mse(z, t.constant(Mat::Zero(5, 5)));
  };
  CHECK(ts::max_fd_error({x}, build) < kGradTol);
}

TEST_CASE("dropout is the identity when inactive and rejects rate >= 1") {
  Tape tape;
  Rng rng(1);
  Tape::Id x = tape.param(Mat::Ones(2, 2));
  CHECK(tape.dropout(x, 0.0, true, rng) == x);
  CHECK(tape.dropout(x, 0.5, false, rng) == x);
  CHECK_THROWS_AS(tape.dropout(x, 1.0, true, rng), ParamError);
}

TEST_CASE("a composite expression of every op differentiates correctly") {
  Rng rng(41);
  std::vector<Mat> inputs = {
      ts::random_matrix(rng, 5, 3), ts::random_matrix(rng, 3, 4),
      ts::random_matrix(rng, 1, 4), ts::random_matrix(rng, 1, 4),
      ts::random_matrix(rng, 4, 2)};
  std::vector<int> labels = {1, 0, 1, 0, 1};
  auto build = [labels](Tape& t, const std::vector<Tape::Id>& p) {
    Tape::Id h = t.relu(t.layer_norm(t.matmul(p[0], p[1]), p[2], p[3]));
    Tape::Id logits = t.matmul(h, p[4]);
    return t.softmax_cross_entropy(logits, labels);
  };
  CHECK(ts::max_fd_error(inputs, build) < kGradTol);
}

TEST_CASE("backward requires a recorded forward pass and resets the tape") {
  Tape tape;
  CHECK_THROWS_AS(tape.backward(0), StateError);

  Tape::Id w = tape.param(Mat::Ones(2, 2));
  Tape::Id loss = tape.mse(w, tape.constant(Mat::Zero(2, 2)));
  std::vector<Mat> grads = tape.backward(loss);
  REQUIRE(grads.size() == 1);
  CHECK(grads[0].rows() == 2);
  CHECK_THROWS_AS(tape.backward(loss), StateError);
}

TEST_CASE("backward insists on a scalar loss") {
  Tape tape;
  Tape::Id w = tape.param(Mat::Ones(2, 3));
  Tape::Id z = tape.relu(w);
  CHECK_THROWS_AS(tape.backward(z), ShapeError);
}

TEST_CASE("backward returns one gradient per parameter in order") {
  Tape tape;
  Tape::Id a = tape.param(Mat::Ones(2, 3));
  Tape::Id b = tape.param(2.0 * Mat::Ones(3, 1));
  Tape::Id loss = tape.mse(tape.matmul(a, b), tape.constant(Mat::Zero(2, 1)));
  std::vector<Mat> grads = tape.backward(loss);
  REQUIRE(grads.size() == 2);
  CHECK(grads[0].rows() == 2);
  CHECK(grads[0].cols() == 3);
  CHECK(grads[1].rows() == 3);
  CHECK(grads[1].cols() == 1);
}

TEST_CASE("softmax rows sum to one and survive huge logits") {
  Rng rng(43);
  Mat x = ts::random_matrix(rng, 6, 5, 300.0);
  x(0, 0) = 1000.0;
  Mat p = num::softmax_rows(x);
  CHECK(p.allFinite());
  for (Index i = 0; i < p.rows(); ++i)
    CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-9);
  CHECK(p.minCoeff() >= 0.0);
}

TEST_CASE("cross entropy of uniform logits is log of the class count") {
  Mat logits = Mat::Constant(4, 3, 0.7);
  double got = num::cross_entropy(logits, {0, 1, 2, 0});
  CHECK(std::abs(got - std::log(3.0)) < kTight);
}

TEST_CASE("cross entropy rejects bad labels and empty batches") {
  Mat logits = Mat::Zero(2, 3);
  CHECK_THROWS_AS(num::cross_entropy(logits, {0}), ShapeError);
  CHECK_THROWS_AS(num::cross_entropy(logits, {0, 3}), IndexError);
  CHECK_THROWS_AS(num::cross_entropy(Mat::Zero(0, 3), {}), ParamError);
}

TEST_CASE("layer_norm_rows standardizes each row before gain and bias") {
  Rng rng(47);
  Mat x = ts::random_matrix(rng, 3, 8, 2.5);
  Mat z = num::layer_norm_rows(x, RowVec::Ones(8), RowVec::Zero(8));
  for (Index i = 0; i < z.rows(); ++i) {
    CHECK(std::abs(z.row(i).mean()) < 1e-9);
    double var = (z.row(i).array() - z.row(i).mean()).square().mean();
    CHECK(std::abs(var - 1.0) < 1e-4);  // epsilon inside the sqrt
  }
  CHECK_THROWS_AS(num::layer_norm_rows(x, RowVec::Ones(7), RowVec::Zero(8)),
                  ShapeError);
}

TEST_CASE("dropout mask entries are zero or the inverted-rate scale") {
  Rng rng(53);
  Mat mask = num::dropout_mask(40, 40, 0.25, rng);
  double scale = 1.0 / 0.75;
  long kept = 0;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j) {
      bool zero = mask(i, j) == 0.0;
      bool scaled = std::abs(mask(i, j) - scale) < kTight;
      CHECK((zero || scaled));
      kept += scaled ? 1 : 0;
    }
  double keep_rate = static_cast<double>(kept) / 1600.0;
  CHECK(std::abs(keep_rate - 0.75) < 0.05);
}

TEST_CASE("dct of a constant signal concentrates in the first coefficient") {
  Index n = 64;
  Vec signal = Vec::Constant(n, 3.0);
  Vec coeffs = num::dct_1d(signal, n);
  CHECK(std::abs(coeffs(0) - 3.0 * std::sqrt(static_cast<double>(n))) < 1e-9);
  CHECK(coeffs.tail(n - 1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("full dct round-trips through its inverse") {
  Rng rng(59);
  Vec signal = ts::random_matrix(rng, 120, 1);
  Vec back = num::idct_1d(num::dct_1d(signal, 120));
  CHECK((back - signal).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("dct of a length-500 ramp matches the naive cosine sum") {
  Index n = 500;
  Vec signal(n);
  for (Index i = 0; i < n; ++i)
    signal(i) = 0.01 * static_cast<double>(i) - 2.0;
  Vec coeffs = num::dct_1d(signal, 60);
  for (Index k = 0; k < 60; ++k)
    CHECK(std::abs(coeffs(k) - ts::naive_dct_coeff(signal, k)) < 1e-9);
}

TEST_CASE("dct validates its sizes") {
  CHECK_THROWS_AS(num::dct_basis(0, 1), ParamError);
  CHECK_THROWS_AS(num::dct_basis(8, 0), ParamError);
  CHECK_THROWS_AS(num::dct_basis(8, 9), ParamError);
}

TEST_CASE("sgd takes exact steps") {
  std::vector<Mat> params = {Mat::Constant(2, 2, 1.0)};
  std::vector<Mat> grads = {Mat::Constant(2, 2, 0.5)};
  num::OptimizerState state;
  num::OptimizerConfig config;
  config.kind = num::OptKind::Sgd;
  config.lr = 0.1;
  num::optimizer_step(params, grads, state, config);
  CHECK((params[0].array() - 0.95).abs().maxCoeff() < kTight);
  CHECK(state.step == 1);
}

TEST_CASE("adam matches a scalar unroll for three steps") {
  num::OptimizerConfig config;
  config.kind = num::OptKind::Adam;
  config.lr = 0.05;
  std::vector<Mat> params = {Mat::Constant(1, 1, 2.0)};
  num::OptimizerState state;
  std::vector<double> grad_values = {0.3, -0.7, 0.05};

  double w = 2.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 3; ++t) {
    double g = grad_values[static_cast<std::size_t>(t - 1)];
    std::vector<Mat> grads = {Mat::Constant(1, 1, g)};
    num::optimizer_step(params, grads, state, config);

    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    double m_hat = m / (1.0 - std::pow(config.beta1, t));
    double v_hat = v / (1.0 - std::pow(config.beta2, t));
    w -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    CHECK(std::abs(params[0](0, 0) - w) < 1e-10);
  }
  CHECK(state.step == 3);
}

TEST_CASE("optimizer_step validates shapes and learning rate") {
  std::vector<Mat> params = {Mat::Zero(2, 2)};
  std::vector<Mat> bad_count;
  std::vector<Mat> bad_shape = {Mat::Zero(2, 3)};
  num::OptimizerState state;
  num::OptimizerConfig config;
  CHECK_THROWS_AS(num::optimizer_step(params, bad_count, state, config),
                  ShapeError);
  CHECK_THROWS_AS(num::optimizer_step(params, bad_shape, state, config),
                  ShapeError);
  config.lr = 0.0;
  std::vector<Mat> grads = {Mat::Zero(2, 2)};
  CHECK_THROWS_AS(num::optimizer_step(params, grads, state, config),
                  ParamError);
}
