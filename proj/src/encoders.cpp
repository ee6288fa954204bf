#include "fedgraph/data/encoders.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fedgraph/errors.hpp"
#include "fedgraph/numerics/activations.hpp"
#include "fedgraph/numerics/dct.hpp"
#include "fedgraph/numerics/optimizer.hpp"
#include "fedgraph/numerics/tape.hpp"
#include "fedgraph/rng.hpp"

namespace fedgraph::data {

Vec encode_accel(const Mat& block, Index keep) {
  if (block.rows() == 0 || block.cols() == 0)
    throw ParamError("encode_accel: empty block");
  Mat basis = num::dct_basis(block.rows(), keep);
  Vec out(block.cols() * keep);
  for (Index c = 0; c < block.cols(); ++c)
    out.segment(c * keep, keep) = basis * block.col(c);
  return out;
}

Mat encode(const Encoder& enc, const Mat& x) {
  if (x.cols() != enc.w1.rows())
    throw ShapeError("encode: input width " + std::to_string(x.cols()) +
                     " but encoder expects " + std::to_string(enc.w1.rows()));
  Mat h = num::relu(((x * enc.w1).rowwise() + enc.b1).eval());
  return (h * enc.w2).rowwise() + enc.b2;
}

namespace {

Mat glorot(Index rows, Index cols, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> unif(-limit, limit);
  Mat w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = unif(rng);
  return w;
}

}  // namespace

AutoencoderResult train_autoencoder(const Mat& inputs, Index hidden,
                                    Index latent, int epochs, double lr,
                                    std::uint64_t seed) {
  if (inputs.rows() == 0) throw ParamError("train_autoencoder: no inputs");
  if (hidden <= 0 || latent <= 0 || latent > inputs.cols())
    throw ParamError("train_autoencoder: invalid hidden " +
                     std::to_string(hidden) + " or latent " +
                     std::to_string(latent) + " for input width " +
                     std::to_string(inputs.cols()));
  if (epochs <= 0) throw ParamError("train_autoencoder: epochs must be >= 1");

  Rng rng(derive_seed(seed, 0xAE));
  Index in = inputs.cols();
  std::vector<Mat> params = {
      glorot(in, hidden, rng),     Mat::Zero(1, hidden),
      glorot(hidden, latent, rng), Mat::Zero(1, latent),
      glorot(latent, hidden, rng), Mat::Zero(1, hidden),
      glorot(hidden, in, rng),     Mat::Zero(1, in),
  };

  num::OptimizerConfig opt;
  opt.kind = num::OptKind::Adam;
  opt.lr = lr;
  num::OptimizerState state;

  auto reconstruction_mse = [&inputs](const std::vector<Mat>& w) {
    Mat h1 = num::relu(((inputs * w[0]).rowwise() + w[1].row(0)).eval());
    Mat z = (h1 * w[2]).rowwise() + w[3].row(0);
    Mat h2 = num::relu(((z * w[4]).rowwise() + w[5].row(0)).eval());
    Mat recon = (h2 * w[6]).rowwise() + w[7].row(0);
    return (recon - inputs).squaredNorm() /
           static_cast<double>(inputs.size());
  };

  num::Tape tape;
  double initial_mse = reconstruction_mse(params);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<num::Tape::Id> p;
    p.reserve(params.size());
    for (const Mat& t : params) p.push_back(tape.param(t));
    auto x = tape.constant(inputs);
    auto h1 = tape.relu(tape.add_row(tape.matmul(x, p[0]), p[1]));
    auto z = tape.add_row(tape.matmul(h1, p[2]), p[3]);
    auto h2 = tape.relu(tape.add_row(tape.matmul(z, p[4]), p[5]));
    auto recon = tape.add_row(tape.matmul(h2, p[6]), p[7]);
    auto loss = tape.mse(recon, x);
    auto grads = tape.backward(loss);
    num::optimizer_step(params, grads, state, opt);
  }

  AutoencoderResult result;
  result.encoder = Encoder{params[0], params[1], params[2], params[3]};
  result.initial_mse = initial_mse;
  result.final_mse = reconstruction_mse(params);
  return result;
}

Vec encode_image_modality(const Mat& block, const Encoder& enc) {
  if (block.rows() == 0) throw ParamError("encode_image_modality: empty block");
  Mat pooled = block.colwise().mean();
  return encode(enc, pooled).transpose();
}

}  // namespace fedgraph::data
