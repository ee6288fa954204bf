#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fedgraph/data/windows.hpp"
#include "fedgraph/eval/metrics.hpp"
#include "fedgraph/models/multimodal.hpp"
#include "fedgraph/models/params.hpp"
#include "fedgraph/numerics/optimizer.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::fed {

struct TrainOptions {
  models::ModelKind kind = models::ModelKind::Gcn;
  num::OptimizerConfig optimizer;
  int local_epochs = 20;
  int batch = 32;
};

// Client-level privacy knobs. Per-step gradients are clipped to `clip`;
// noise N(0, (sigma * clip)^2) is added once per round to the flattened
// update a client sends, or after every local step when noise_every_step
// is set. sigma == 0 adds nothing and draws no randomness, and an infinite
// clip leaves gradients bit-identical, so a run with (sigma=0, clip=inf)
// matches a run with DP disabled exactly.
struct DpOptions {
  bool enabled = false;
  double clip = 1.0;
  double sigma = 0.0;
  bool noise_every_step = false;
};

// Everything one client owns: its windows (a transductive union of train
// and test nodes), the split, one normalized adjacency per modality, and
// optimizer state that persists across rounds.
struct ClientState {
  int id = 0;
  data::WindowSet windows;
  std::vector<Index> train_nodes;
  std::vector<Index> test_nodes;
  std::vector<Mat> a_hats;
  num::OptimizerState opt_state;
};

struct LocalResult {
  std::vector<Mat> delta;
  double mean_loss = 0.0;
  long steps = 0;
};

// Local epochs of mini-batch training starting from the global weights;
// returns the parameter delta. Loss is computed on batch rows of the
// full-set forward pass (transductive propagation sees every node).
LocalResult local_train(ClientState& client, const models::ModelParams& global,
                        const TrainOptions& opts, const DpOptions& dp,
                        std::uint64_t seed);

// global += weighted mean of deltas (uniform when weights is null).
void fedavg_aggregate(models::ModelParams& global,
                      const std::vector<std::vector<Mat>>& deltas,
                      const std::vector<double>* weights = nullptr);

// floor(fraction * n) distinct clients, at least one, uniformly without
// replacement; returned sorted.
std::vector<int> sample_clients(int n_clients, double fraction, Rng& rng);

struct Evaluation {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double micro_f1 = 0.0;
  Eigen::MatrixXi confusion;
};

// Pooled test-node metrics over all clients under the given weights.
Evaluation evaluate_clients(const std::vector<ClientState>& clients,
                            const models::ModelParams& params,
                            models::ModelKind kind, int classes);

struct RoundReport {
  int round = 0;
  double epsilon = 0.0;  // +inf when DP is off
  double train_loss_mean = 0.0;
  double test_accuracy = 0.0;
  double test_f1 = 0.0;
  std::vector<int> sampled;
};

struct AuditRow {
  int round = 0;
  int alpha_star = 0;
  double gamma_cum = 0.0;
  double epsilon_spent = 0.0;
};

struct FedRunConfig {
  TrainOptions train;
  DpOptions dp;
  int rounds = 50;
  double client_fraction = 1.0;
  bool weighted_aggregation = false;
  double accountant_q = 0.01;
  double delta = 1e-3;
  int classes = 7;
  // Which F1 average lands in RoundReport::test_f1.
  eval::F1Average f1_average = eval::F1Average::Macro;
  std::uint64_t seed = 42;
  // Invoked after each round's aggregation and evaluation (checkpointing).
  std::function<void(int round, const models::ModelParams&)> round_hook;
};

struct RunResult {
  models::ModelParams model;
  std::vector<RoundReport> rounds;
  std::vector<AuditRow> audit;
};

// Full training loop: sample clients, run local training, aggregate,
// account, evaluate after every round.
RunResult run_federated(std::vector<ClientState>& clients,
                        const models::ModelDims& dims,
                        const FedRunConfig& config);

// Centralized baseline: the merged data trains as a single always-sampled
// client doing one epoch per round, so reports are per epoch and the
// accountant advances once per epoch.
RunResult run_centralized(ClientState merged, const models::ModelDims& dims,
                          int epochs, FedRunConfig config);

}  // namespace fedgraph::fed
