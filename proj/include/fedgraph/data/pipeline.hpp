#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedgraph/data/mex_io.hpp"
#include "fedgraph/data/windows.hpp"

namespace fedgraph::data {

// Knobs of the raw-recording -> encoded-window pipeline. Standardization
// statistics and the autoencoder are fitted on the training split only,
// per client and per modality.
struct PipelineConfig {
  std::vector<std::string> modalities = {"act", "acw", "dc", "pm"};
  double window_s = 5.0;
  double stride_s = 2.0;
  Index dct_keep = 60;
  Index ae_hidden = 256;
  Index ae_latent = 64;
  int ae_epochs = 200;
  double ae_lr = 0.005;
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
};

// Encoded windows of one client plus its stratified split.
struct ClientWindows {
  WindowSet windows;
  std::vector<Index> train_idx;
  std::vector<Index> test_idx;
};

// Runs the full per-client pipeline: per-group resampling onto the common
// time span of all streams, windowing, stratified splitting, train-fitted
// z-scoring, and per-modality encoding (DCT for accelerometer streams,
// mean-pool + autoencoder for image streams).
ClientWindows build_client_windows(const ClientRecordings& client,
                                   const PipelineConfig& config);

}  // namespace fedgraph::data
