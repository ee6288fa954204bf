#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::models {

// Whether the per-modality encoders propagate over the window graph or act
// on node features alone. Both kinds share one parameter layout, so weights
// are interchangeable between them.
enum class ModelKind { Gcn, Ffn };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct ModelDims {
  std::vector<std::string> modalities;
  std::vector<Index> input_dims;
  Index hidden = 64;
  int classes = 7;
  int layers = 2;
  double dropout = 0.5;
};

void validate_dims(const ModelDims& dims);

// Named parameter tensors in a fixed order: per modality and layer a
// propagation weight, a residual (self) weight and layer-norm gain/bias,
// then per modality an attention vector and bias, then the shared
// classifier weight and bias.
struct ModelParams {
  ModelDims dims;
  std::vector<std::string> names;
  std::vector<Mat> tensors;

  Index numel() const;
  Mat& tensor(const std::string& name);
  const Mat& tensor(const std::string& name) const;

  // Concatenation of all tensors in layout order, column-major within each.
  Vec flatten() const;
  void unflatten(const Vec& flat);
};

// Glorot-uniform weights, unit gains, zero biases; the kind argument is
// accepted for interface symmetry but does not change the layout.
ModelParams init_params(std::uint64_t seed, const ModelDims& dims,
                        ModelKind kind);

// Same flatten order for a gradient (or delta) aligned with `params`.
Vec flatten_tensors(const std::vector<Mat>& tensors);
void unflatten_tensors(const Vec& flat, std::vector<Mat>& tensors);

// Round-trippable text format: a header with the dims, then one line per
// tensor with name, shape and 17-significant-digit entries.
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace fedgraph::models
