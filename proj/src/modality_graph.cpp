#include "fedgraph/graph/modality_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "fedgraph/errors.hpp"

namespace fedgraph::graph {

Mat normalize_adjacency(const Mat& a_tilde) {
  if (a_tilde.rows() != a_tilde.cols())
    throw ShapeError("normalize_adjacency: " + std::to_string(a_tilde.rows()) +
                     "x" + std::to_string(a_tilde.cols()) + " is not square");
  if ((a_tilde.array() != a_tilde.transpose().array()).any())
    throw ParamError("normalize_adjacency: adjacency is not symmetric");
  if ((a_tilde.array() < 0.0).any())
    throw ParamError("normalize_adjacency: negative entry in adjacency");
  if ((a_tilde.diagonal().array() <= 0.0).any())
    throw ParamError("normalize_adjacency: missing self loops on diagonal");
  Vec inv_sqrt_deg = a_tilde.rowwise().sum().array().rsqrt();
  return (a_tilde.array().colwise() * inv_sqrt_deg.array()).rowwise() *
         inv_sqrt_deg.transpose().array();
}

Mat propagate(const Mat& a_hat, const Mat& h) {
  if (a_hat.cols() != h.rows())
    throw ShapeError("propagate: adjacency " + std::to_string(a_hat.rows()) +
                     "x" + std::to_string(a_hat.cols()) + " against features " +
                     std::to_string(h.rows()) + "x" +
                     std::to_string(h.cols()));
  return a_hat * h;
}

double percentile_value(std::vector<double> values, double p) {
  if (values.empty()) throw ParamError("percentile_value: empty sample");
  if (!(p >= 0.0 && p <= 100.0))
    throw ParamError("percentile_value: percentile " + std::to_string(p) +
                     " outside [0, 100]");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(rank));
  auto hi = static_cast<std::size_t>(std::ceil(rank));
  double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ModalityGraph build_graph(const Mat& features,
                          const std::vector<int>& recording_ids,
                          const std::vector<int>& window_index,
                          double percentile,
                          const std::vector<Index>* train_nodes) {
  Index n = features.rows();
  if (n == 0) throw ParamError("build_graph: no nodes");
  if (static_cast<Index>(recording_ids.size()) != n ||
      static_cast<Index>(window_index.size()) != n)
    throw ShapeError("build_graph: " + std::to_string(n) + " nodes but " +
                     std::to_string(recording_ids.size()) +
                     " recording ids and " +
                     std::to_string(window_index.size()) + " window indices");

  Mat adj = Mat::Zero(n, n);

  // Temporal chain: consecutive windows of the same recording.
  std::map<int, std::vector<Index>> by_recording;
  for (Index i = 0; i < n; ++i) by_recording[recording_ids[i]].push_back(i);
  for (auto& [rec, nodes] : by_recording) {
    std::sort(nodes.begin(), nodes.end(), [&](Index a, Index b) {
      return window_index[a] < window_index[b];
    });
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      Index a = nodes[k], b = nodes[k + 1];
      if (window_index[b] == window_index[a] + 1 && a != b) {
        adj(a, b) = 1.0;
        adj(b, a) = 1.0;
      }
    }
  }

  // Distance edges under a percentile threshold estimated on training pairs.
  std::vector<Index> pool;
  if (train_nodes) {
    pool = *train_nodes;
    for (Index i : pool)
      if (i < 0 || i >= n)
        throw IndexError("build_graph: train node " + std::to_string(i) +
                         " outside [0, " + std::to_string(n) + ")");
  } else {
    pool.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  }
  std::vector<double> train_dists;
  train_dists.reserve(pool.size() * (pool.size() - 1) / 2 + 1);
  for (std::size_t a = 0; a < pool.size(); ++a)
    for (std::size_t b = a + 1; b < pool.size(); ++b)
      train_dists.push_back((features.row(pool[a]) - features.row(pool[b])).norm());

  double threshold = -1.0;
  if (!train_dists.empty()) {
    threshold = percentile_value(std::move(train_dists), percentile);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if ((features.row(i) - features.row(j)).norm() <= threshold) {
          adj(i, j) = 1.0;
          adj(j, i) = 1.0;
        }
  }

  ModalityGraph g;
  g.n = n;
  g.threshold = threshold;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (adj(i, j) != 0.0) g.edges.push_back({i, j});
  g.a_hat = normalize_adjacency(adj + Mat::Identity(n, n));
  return g;
}

}  // namespace fedgraph::graph
