#pragma once

#include <vector>

#include "fedgraph/models/params.hpp"
#include "fedgraph/numerics/tape.hpp"
#include "fedgraph/rng.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::models {

// Per-modality encoder stack with residual self term,
//   z = dropout(relu(layer_norm(A_hat * h * W + h * B))),
// followed by attention-weighted fusion across modalities and a linear
// classifier head. When a modality's adjacency pointer is null the
// propagation term collapses to h * W, which is the feature-only (FFN)
// variant of the same network.
struct ForwardIds {
  num::Tape::Id logits = -1;
  num::Tape::Id fused = -1;
  num::Tape::Id attention = -1;
};

// Records the forward pass on the tape, registering every parameter tensor
// in layout order (so Tape::backward aligns with ModelParams::tensors).
ForwardIds forward_on_tape(num::Tape& tape, const ModelParams& params,
                           const std::vector<const Mat*>& adjacency,
                           const std::vector<Mat>& features, bool training,
                           Rng& rng);

struct Prediction {
  Mat logits;
  Mat fused;
  Mat attention;
};

// Inference entry points; dropout is inactive.
Prediction gcn_forward(const ModelParams& params,
                       const std::vector<const Mat*>& adjacency,
                       const std::vector<Mat>& features);
Prediction ffn_forward(const ModelParams& params,
                       const std::vector<Mat>& features);

// Argmax per row; ties resolve to the lowest class index.
std::vector<int> predict_labels(const Mat& logits);

}  // namespace fedgraph::models
