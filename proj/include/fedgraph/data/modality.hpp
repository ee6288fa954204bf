#pragma once

#include <string>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::data {

// Static description of one sensor stream: nominal sample rate, channel
// count, and whether frames are flattened images (encoded by pooling plus
// autoencoder) or accelerometer axes (encoded by per-channel DCT).
struct ModalityInfo {
  std::string name;
  double rate_hz = 0.0;
  Index channels = 0;
  bool image = false;
};

// The four streams of the wearable/pressure/depth setup: two wrist/thigh
// accelerometers at 100 Hz with 3 channels, a 12x16 depth camera and a
// 32x16 pressure mat at 15 Hz.
const std::vector<ModalityInfo>& default_modalities();

// Lookup by name; throws SchemaError for unknown names.
const ModalityInfo& modality_info(const std::string& name);

}  // namespace fedgraph::data
