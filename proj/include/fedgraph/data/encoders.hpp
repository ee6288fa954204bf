#pragma once

#include <cstdint>

#include "fedgraph/types.hpp"

namespace fedgraph::data {

// Frequency encoding of an accelerometer window: the first `keep` DCT-II
// coefficients of each channel, concatenated channel by channel. A block of
// F x C frames becomes a vector of C * keep values.
Vec encode_accel(const Mat& block, Index keep);

// Two-layer encoder with ReLU hidden activation and a linear latent layer.
struct Encoder {
  Mat w1;
  RowVec b1;
  Mat w2;
  RowVec b2;

  Index input_dim() const { return w1.rows(); }
  Index latent_dim() const { return w2.cols(); }
};

// Encodes a batch of row vectors into the latent space.
Mat encode(const Encoder& enc, const Mat& x);

struct AutoencoderResult {
  Encoder encoder;
  double initial_mse = 0.0;
  double final_mse = 0.0;
};

// Trains a symmetric autoencoder (input -> hidden -> latent -> hidden ->
// input) on the given row vectors with full-batch Adam and returns the
// encoder half plus the reconstruction error before and after training.
AutoencoderResult train_autoencoder(const Mat& inputs, Index hidden,
                                    Index latent, int epochs, double lr,
                                    std::uint64_t seed);

// Mean-pools the frames of a block and encodes the pooled vector.
Vec encode_image_modality(const Mat& block, const Encoder& enc);

}  // namespace fedgraph::data
