#pragma once

#include <string>
#include <vector>

#include "fedgraph/cli/config.hpp"

namespace fedgraph::cli {

// One finished (cell, replicate) run, as written to summary.csv.
struct SummaryRow {
  std::string cell;
  int replicate = 0;
  std::string model;
  std::string setting;
  std::string epsilon;  // "none" or the spent budget
  double accuracy = 0.0;
  double f1 = 0.0;
  double utility_loss = 0.0;  // NaN without a no-privacy reference
};

struct ExperimentResult {
  std::string out_dir;
  std::vector<SummaryRow> summary;
};

// Expands sweeps, runs every cell for every replicate, and writes all
// artifacts (per-round metrics, accountant audit, confusion, embeddings,
// final weights, summary and utility tables, MANIFEST) under the output
// directory; `out_override` replaces the configured output.dir.
ExperimentResult run_experiment(const ConfigMap& config,
                                const std::string& out_override = "");

struct DatasetResult {
  std::string out_dir;
  std::size_t recordings = 0;
};

// Writes synthetic raw recordings in the dataset layout.
DatasetResult generate_dataset(const ConfigMap& config,
                               const std::string& out_override = "");

struct TestbedStats {
  std::string out_dir;
  double plateau = 0.0;  // mean squared distance over the last fifth
  double floor = 0.0;
};

// Runs the quadratic convergence testbed and writes its trajectory.
TestbedStats run_testbed(const ConfigMap& config,
                         const std::string& out_override = "");

}  // namespace fedgraph::cli
