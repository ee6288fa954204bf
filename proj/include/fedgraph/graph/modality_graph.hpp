#pragma once

#include <array>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::graph {

// Undirected window graph for one modality plus its normalized adjacency.
// Edge list stores each pair once with i < j and no self loops; a_hat is
// D^{-1/2} (A + I) D^{-1/2} over the full node set.
struct ModalityGraph {
  Index n = 0;
  std::vector<std::array<Index, 2>> edges;
  double threshold = 0.0;
  Mat a_hat;
};

// Symmetric degree normalization of a self-looped adjacency.
Mat normalize_adjacency(const Mat& a_tilde);

// One propagation step: a_hat * h.
Mat propagate(const Mat& a_hat, const Mat& h);

// Builds the union graph over windows of one modality.
//
// Temporal edges connect windows of the same recording whose window indices
// are consecutive. Distance edges connect any two windows whose Euclidean
// feature distance is at most the given percentile of pairwise distances;
// when train_nodes is non-null the percentile is taken over training pairs
// only, but distance edges may still join any pair of nodes.
ModalityGraph build_graph(const Mat& features,
                          const std::vector<int>& recording_ids,
                          const std::vector<int>& window_index,
                          double percentile,
                          const std::vector<Index>* train_nodes = nullptr);

// Linear-interpolation percentile of a sample, matching the convention
// rank = p/100 * (n - 1) over the sorted values.
double percentile_value(std::vector<double> values, double p);

}  // namespace fedgraph::graph
