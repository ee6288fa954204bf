#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedgraph/data/recording.hpp"
#include "fedgraph/data/windows.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::data {

// Synthetic multimodal windows with class structure: every (class,
// modality) pair gets a shared mean vector scaled by `separation`, windows
// scatter around it with isotropic `noise`. Class proportions per client
// are skewed by a Dirichlet(0.5) draw, so clients are non-iid.
struct SyntheticSpec {
  int clients = 5;
  int classes = 3;
  int windows_per_class = 10;
  // Total windows per client; 0 means classes * windows_per_class.
  int windows_per_client = 0;
  std::vector<std::string> modalities = {"act", "acw", "dc", "pm"};
  std::vector<Index> dims = {180, 180, 64, 64};
  double separation = 3.0;
  double noise = 1.0;
  std::uint64_t seed = 42;
};

void validate_synthetic_spec(const SyntheticSpec& spec);

// One window set per client. Windows of the same (client, class) pair share
// a recording id, so temporal edges chain them in generation order.
std::vector<WindowSet> generate_synthetic(const SyntheticSpec& spec);

// Raw-recording variant used by the dataset generator: class-dependent
// sinusoid mixtures sampled at per-modality rates, suitable for running the
// full windowing/encoding pipeline.
struct SyntheticRawSpec {
  int clients = 5;
  int classes = 7;
  int repetitions = 1;
  double duration_s = 20.0;
  double noise = 0.25;
  std::uint64_t seed = 42;
};

std::vector<RawRecording> generate_synthetic_raw(const SyntheticRawSpec& spec);

}  // namespace fedgraph::data
