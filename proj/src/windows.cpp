#include "fedgraph/data/windows.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fedgraph/errors.hpp"
#include "fedgraph/rng.hpp"

namespace fedgraph::data {

void validate_window_set(const WindowSet& ws) {
  if (ws.modalities.size() != ws.features.size())
    throw ShapeError("window set " + ws.client_id + ": " +
                     std::to_string(ws.modalities.size()) +
                     " modality names for " +
                     std::to_string(ws.features.size()) +
                     " feature matrices");
  Index n = ws.size();
  for (std::size_t m = 0; m < ws.features.size(); ++m)
    if (ws.features[m].rows() != n)
      throw ShapeError("window set " + ws.client_id + ": modality " +
                       ws.modalities[m] + " has " +
                       std::to_string(ws.features[m].rows()) +
                       " rows for " + std::to_string(n) + " labels");
  if (ws.recording_ids.size() != ws.labels.size() ||
      ws.window_index.size() != ws.labels.size())
    throw ShapeError("window set " + ws.client_id +
                     ": recording ids / window indices out of step with "
                     "labels");
}

WindowSet select_windows(const WindowSet& ws, const std::vector<Index>& rows) {
  validate_window_set(ws);
  WindowSet out;
  out.client_id = ws.client_id;
  out.modalities = ws.modalities;
  Index k = static_cast<Index>(rows.size());
  for (const Mat& f : ws.features) {
    Mat sel(k, f.cols());
    for (Index i = 0; i < k; ++i) {
      Index r = rows[static_cast<std::size_t>(i)];
      if (r < 0 || r >= ws.size())
        throw IndexError("select_windows: row " + std::to_string(r) +
                         " outside [0, " + std::to_string(ws.size()) + ")");
      sel.row(i) = f.row(r);
    }
    out.features.push_back(std::move(sel));
  }
  for (Index r : rows) {
    auto u = static_cast<std::size_t>(r);
    out.labels.push_back(ws.labels[u]);
    out.recording_ids.push_back(ws.recording_ids[u]);
    out.window_index.push_back(ws.window_index[u]);
  }
  return out;
}

void append_windows(WindowSet& base, const WindowSet& extra) {
  validate_window_set(extra);
  if (base.size() == 0 && base.modalities.empty()) {
    base = extra;
    return;
  }
  validate_window_set(base);
  if (base.modalities != extra.modalities)
    throw SchemaError("append_windows: modality lists differ");
  int shift = 0;
  for (int r : base.recording_ids) shift = std::max(shift, r + 1);
  for (std::size_t m = 0; m < base.features.size(); ++m) {
    if (base.features[m].cols() != extra.features[m].cols())
      throw ShapeError("append_windows: feature width mismatch for " +
                       base.modalities[m]);
    Mat joined(base.features[m].rows() + extra.features[m].rows(),
               base.features[m].cols());
    joined << base.features[m], extra.features[m];
    base.features[m] = std::move(joined);
  }
  for (std::size_t i = 0; i < extra.labels.size(); ++i) {
    base.labels.push_back(extra.labels[i]);
    base.recording_ids.push_back(extra.recording_ids[i] + shift);
    base.window_index.push_back(extra.window_index[i]);
  }
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(
    const std::vector<int>& labels, double train_fraction,
    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ParamError("split_indices: train fraction " +
                     std::to_string(train_fraction) + " outside (0, 1)");
  if (labels.empty()) throw ParamError("split_indices: no windows");

  std::map<int, std::vector<Index>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_label[labels[i]].push_back(static_cast<Index>(i));

  Rng rng(derive_seed(seed, 0x5B117));
  std::vector<Index> train, test;
  for (auto& [label, rows] : by_label) {
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n = static_cast<Index>(rows.size());
    auto n_train = static_cast<Index>(
        std::llround(train_fraction * static_cast<double>(n)));
    if (n >= 2) n_train = std::clamp<Index>(n_train, 1, n - 1);
    if (n == 1) n_train = 1;
    for (Index i = 0; i < n; ++i)
      (i < n_train ? train : test).push_back(rows[static_cast<std::size_t>(i)]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::pair<WindowSet, WindowSet> split_train_test(const WindowSet& ws,
                                                 double train_fraction,
                                                 std::uint64_t seed) {
  validate_window_set(ws);
  auto [train_rows, test_rows] = split_indices(ws.labels, train_fraction, seed);
  return {select_windows(ws, train_rows), select_windows(ws, test_rows)};
}

}  // namespace fedgraph::data
