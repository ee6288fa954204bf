#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::data {

// Encoded windows of one client, aligned across modalities: row i of every
// feature matrix, labels[i], recording_ids[i] and window_index[i] all
// describe the same time window.
struct WindowSet {
  std::string client_id;
  std::vector<std::string> modalities;
  std::vector<Mat> features;
  std::vector<int> labels;
  std::vector<int> recording_ids;
  std::vector<int> window_index;

  Index size() const { return static_cast<Index>(labels.size()); }
};

// Throws unless all parallel containers agree on the window count and the
// modality list matches the feature list.
void validate_window_set(const WindowSet& ws);

// Row subset of a window set, in the order given.
WindowSet select_windows(const WindowSet& ws, const std::vector<Index>& rows);

// Appends the windows of `extra` to `base` (same modalities, same feature
// widths); recording ids of `extra` are shifted to stay disjoint.
void append_windows(WindowSet& base, const WindowSet& extra);

// Stratified train/test indices: within each label, a deterministic shuffle
// followed by a round(frac * n) cut, clamped so both sides stay non-empty
// whenever a class has at least two windows. Single-window classes go to
// the training side entirely.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(
    const std::vector<int>& labels, double train_fraction,
    std::uint64_t seed);

// Stratified split into two window sets.
std::pair<WindowSet, WindowSet> split_train_test(const WindowSet& ws,
                                                 double train_fraction,
                                                 std::uint64_t seed);

}  // namespace fedgraph::data
