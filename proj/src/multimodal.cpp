#include "fedgraph/models/multimodal.hpp"

#include <string>

#include "fedgraph/errors.hpp"

namespace fedgraph::models {

ForwardIds forward_on_tape(num::Tape& tape, const ModelParams& params,
                           const std::vector<const Mat*>& adjacency,
                           const std::vector<Mat>& features, bool training,
                           Rng& rng) {
  const ModelDims& dims = params.dims;
  validate_dims(dims);
  std::size_t n_mods = dims.modalities.size();
  if (features.size() != n_mods)
    throw ShapeError("forward: " + std::to_string(features.size()) +
                     " feature matrices for " + std::to_string(n_mods) +
                     " modalities");
  if (adjacency.size() != n_mods)
    throw ShapeError("forward: " + std::to_string(adjacency.size()) +
                     " adjacency slots for " + std::to_string(n_mods) +
                     " modalities");
  Index n = features[0].rows();
  for (std::size_t m = 0; m < n_mods; ++m) {
    if (features[m].rows() != n)
      throw ShapeError("forward: modality " + dims.modalities[m] + " has " +
                       std::to_string(features[m].rows()) + " rows, expected " +
                       std::to_string(n));
    if (features[m].cols() != dims.input_dims[m])
      throw ShapeError("forward: modality " + dims.modalities[m] + " is " +
                       std::to_string(features[m].cols()) + " wide, model expects " +
                       std::to_string(dims.input_dims[m]));
    if (adjacency[m] && (adjacency[m]->rows() != n || adjacency[m]->cols() != n))
      throw ShapeError("forward: adjacency for " + dims.modalities[m] +
                       " is " + std::to_string(adjacency[m]->rows()) + "x" +
                       std::to_string(adjacency[m]->cols()) + " for " +
                       std::to_string(n) + " nodes");
  }

  // Parameters must be registered in layout order so gradients line up.
  std::vector<num::Tape::Id> p;
  p.reserve(params.tensors.size());
  for (const Mat& t : params.tensors) p.push_back(tape.param(t));

  auto tensor_id = [&](std::size_t idx) { return p[idx]; };
  std::size_t per_mod = 4 * static_cast<std::size_t>(dims.layers) + 2;

  std::vector<num::Tape::Id> encodings;
  encodings.reserve(n_mods);
  std::vector<num::Tape::Id> scores;
  for (std::size_t m = 0; m < n_mods; ++m) {
    num::Tape::Id adj = -1;
    if (adjacency[m]) adj = tape.constant(*adjacency[m]);
    num::Tape::Id h = tape.constant(features[m]);
    std::size_t base = m * per_mod;
    for (int l = 0; l < dims.layers; ++l) {
      std::size_t at = base + 4 * static_cast<std::size_t>(l);
      num::Tape::Id hw = tape.matmul(h, tensor_id(at + 0));
      num::Tape::Id prop = adjacency[m] ? tape.matmul(adj, hw) : hw;
      num::Tape::Id self = tape.matmul(h, tensor_id(at + 1));
      num::Tape::Id pre =
          tape.layer_norm(tape.add(prop, self), tensor_id(at + 2),
                          tensor_id(at + 3));
      h = tape.dropout(tape.relu(pre), dims.dropout, training, rng);
    }
    encodings.push_back(h);
    std::size_t attn = base + 4 * static_cast<std::size_t>(dims.layers);
    scores.push_back(
        tape.add_row(tape.matmul(h, tensor_id(attn)), tensor_id(attn + 1)));
  }

  num::Tape::Id attention = tape.softmax_rows(tape.concat_cols(scores));
  num::Tape::Id fused = -1;
  for (std::size_t m = 0; m < n_mods; ++m) {
    num::Tape::Id weighted = tape.scale_cols(
        tape.slice_cols(attention, static_cast<Index>(m), 1), encodings[m]);
    fused = m == 0 ? weighted : tape.add(fused, weighted);
  }

  std::size_t cls = n_mods * per_mod;
  num::Tape::Id logits =
      tape.add_row(tape.matmul(fused, tensor_id(cls)), tensor_id(cls + 1));

  ForwardIds out;
  out.logits = logits;
  out.fused = fused;
  out.attention = attention;
  return out;
}

namespace {

Prediction run_inference(const ModelParams& params,
                         const std::vector<const Mat*>& adjacency,
                         const std::vector<Mat>& features) {
  num::Tape tape;
  Rng rng(0);
  ForwardIds ids = forward_on_tape(tape, params, adjacency, features,
                                   /*training=*/false, rng);
  Prediction pred;
  pred.logits = tape.value(ids.logits);
  pred.fused = tape.value(ids.fused);
  pred.attention = tape.value(ids.attention);
  return pred;
}

}  // namespace

Prediction gcn_forward(const ModelParams& params,
                       const std::vector<const Mat*>& adjacency,
                       const std::vector<Mat>& features) {
  return run_inference(params, adjacency, features);
}

Prediction ffn_forward(const ModelParams& params,
                       const std::vector<Mat>& features) {
  std::vector<const Mat*> no_adj(features.size(), nullptr);
  return run_inference(params, no_adj, features);
}

std::vector<int> predict_labels(const Mat& logits) {
  if (logits.rows() == 0 || logits.cols() == 0)
    throw ParamError("predict_labels: empty logits");
  std::vector<int> labels(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace fedgraph::models
