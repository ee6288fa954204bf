#include "fedgraph/fed/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "fedgraph/errors.hpp"
#include "fedgraph/eval/metrics.hpp"
#include "fedgraph/numerics/tape.hpp"
#include "fedgraph/privacy/privacy.hpp"

namespace fedgraph::fed {

namespace {

std::vector<const Mat*> adjacency_for(const ClientState& client,
                                      models::ModelKind kind) {
  std::vector<const Mat*> adj(client.windows.features.size(), nullptr);
  if (kind == models::ModelKind::Gcn) {
    if (client.a_hats.size() != client.windows.features.size())
      throw StateError("client " + std::to_string(client.id) + " has " +
                       std::to_string(client.a_hats.size()) +
                       " adjacencies for " +
                       std::to_string(client.windows.features.size()) +
                       " modalities");
    for (std::size_t m = 0; m < adj.size(); ++m) adj[m] = &client.a_hats[m];
  }
  return adj;
}

}  // namespace

LocalResult local_train(ClientState& client, const models::ModelParams& global,
                        const TrainOptions& opts, const DpOptions& dp,
                        std::uint64_t seed) {
  if (client.train_nodes.empty())
    throw StateError("client " + std::to_string(client.id) +
                     " has no training windows");
  if (opts.local_epochs < 1)
    throw ParamError("local_train: local epochs must be >= 1");
  if (opts.batch < 1) throw ParamError("local_train: batch must be >= 1");
  data::validate_window_set(client.windows);

  models::ModelParams local = global;
  std::vector<const Mat*> adj = adjacency_for(client, opts.kind);
  Rng rng(derive_seed(seed, 0x10CA1));

  std::vector<Index> order = client.train_nodes;
  num::Tape tape;
  double loss_sum = 0.0;
  long steps = 0;
  for (int epoch = 0; epoch < opts.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opts.batch)) {
      std::size_t stop = std::min(order.size(),
                                  start + static_cast<std::size_t>(opts.batch));
      std::vector<Index> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                               order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::vector<int> batch_labels;
      batch_labels.reserve(batch.size());
      for (Index node : batch)
        batch_labels.push_back(
            client.windows.labels[static_cast<std::size_t>(node)]);

      models::ForwardIds ids = models::forward_on_tape(
          tape, local, adj, client.windows.features, /*training=*/true, rng);
      num::Tape::Id batch_logits = tape.gather_rows(ids.logits, batch);
      num::Tape::Id loss = tape.softmax_cross_entropy(batch_logits, batch_labels);
      loss_sum += tape.scalar_value(loss);
      ++steps;

      std::vector<Mat> grads = tape.backward(loss);
      if (dp.enabled) {
        Vec flat = models::flatten_tensors(grads);
        flat = privacy::clip_to_norm(flat, dp.clip);
        if (dp.noise_every_step && dp.sigma > 0.0)
          privacy::add_gaussian_noise(flat, dp.sigma, dp.clip, rng);
        models::unflatten_tensors(flat, grads);
      }
      num::optimizer_step(local.tensors, grads, client.opt_state,
                          opts.optimizer);
    }
  }

  LocalResult result;
  result.steps = steps;
  result.mean_loss = loss_sum / static_cast<double>(steps);
  result.delta.reserve(local.tensors.size());
  for (std::size_t i = 0; i < local.tensors.size(); ++i)
    result.delta.push_back(local.tensors[i] - global.tensors[i]);
  if (dp.enabled && !dp.noise_every_step && dp.sigma > 0.0) {
    Vec flat = models::flatten_tensors(result.delta);
    privacy::add_gaussian_noise(flat, dp.sigma, dp.clip, rng);
    models::unflatten_tensors(flat, result.delta);
  }
  return result;
}

void fedavg_aggregate(models::ModelParams& global,
                      const std::vector<std::vector<Mat>>& deltas,
                      const std::vector<double>* weights) {
  if (deltas.empty()) throw ParamError("fedavg_aggregate: no client updates");
  std::vector<double> coef(deltas.size(),
                           1.0 / static_cast<double>(deltas.size()));
  if (weights) {
    if (weights->size() != deltas.size())
      throw ShapeError("fedavg_aggregate: " + std::to_string(weights->size()) +
                       " weights for " + std::to_string(deltas.size()) +
                       " updates");
    double total = std::accumulate(weights->begin(), weights->end(), 0.0);
    if (!(total > 0.0))
      throw ParamError("fedavg_aggregate: weights must sum to > 0");
    for (std::size_t i = 0; i < coef.size(); ++i)
      coef[i] = (*weights)[i] / total;
  }
  for (const auto& delta : deltas) {
    if (delta.size() != global.tensors.size())
      throw ShapeError("fedavg_aggregate: update with " +
                       std::to_string(delta.size()) + " tensors for model of " +
                       std::to_string(global.tensors.size()));
    for (std::size_t t = 0; t < delta.size(); ++t)
      if (delta[t].rows() != global.tensors[t].rows() ||
          delta[t].cols() != global.tensors[t].cols())
        throw ShapeError("fedavg_aggregate: tensor " + global.names[t] +
                         " shape mismatch in client update");
  }
  for (std::size_t i = 0; i < deltas.size(); ++i)
    for (std::size_t t = 0; t < global.tensors.size(); ++t)
      global.tensors[t] += coef[i] * deltas[i][t];
}

std::vector<int> sample_clients(int n_clients, double fraction, Rng& rng) {
  if (n_clients < 1) throw ParamError("sample_clients: no clients");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ParamError("sample_clients: fraction " + std::to_string(fraction) +
                     " outside (0, 1]");
  int m = static_cast<int>(std::floor(fraction * n_clients));
  m = std::clamp(m, 1, n_clients);
  std::vector<int> ids(static_cast<std::size_t>(n_clients));
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first m entries are the sample.
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n_clients - 1);
    std::swap(ids[static_cast<std::size_t>(i)],
              ids[static_cast<std::size_t>(pick(rng))]);
  }
  ids.resize(static_cast<std::size_t>(m));
  std::sort(ids.begin(), ids.end());
  return ids;
}

Evaluation evaluate_clients(const std::vector<ClientState>& clients,
                            const models::ModelParams& params,
                            models::ModelKind kind, int classes) {
  std::vector<int> pred, truth;
  for (const ClientState& client : clients) {
    if (client.test_nodes.empty()) continue;
    std::vector<const Mat*> adj = adjacency_for(client, kind);
    models::Prediction p =
        models::gcn_forward(params, adj, client.windows.features);
    std::vector<int> labels = models::predict_labels(p.logits);
    for (Index node : client.test_nodes) {
      pred.push_back(labels[static_cast<std::size_t>(node)]);
      truth.push_back(client.windows.labels[static_cast<std::size_t>(node)]);
    }
  }
  if (pred.empty())
    throw StateError("evaluate_clients: no test windows on any client");
  Evaluation e;
  e.accuracy = eval::accuracy(pred, truth);
  e.macro_f1 = eval::macro_f1(pred, truth, classes);
  e.weighted_f1 = eval::weighted_f1(pred, truth, classes);
  e.micro_f1 = eval::micro_f1(pred, truth, classes);
  e.confusion = eval::confusion(pred, truth, classes);
  return e;
}

namespace {

double selected_f1(const Evaluation& e, eval::F1Average average) {
  switch (average) {
    case eval::F1Average::Macro: return e.macro_f1;
    case eval::F1Average::Micro: return e.micro_f1;
    case eval::F1Average::Weighted: return e.weighted_f1;
  }
  throw ParamError("invalid F1 average value");
}

}  // namespace

RunResult run_federated(std::vector<ClientState>& clients,
                        const models::ModelDims& dims,
                        const FedRunConfig& config) {
  if (clients.empty()) throw ParamError("run_federated: no clients");
  if (config.rounds < 1) throw ParamError("run_federated: rounds must be >= 1");
  models::validate_dims(dims);

  models::ModelParams global =
      models::init_params(config.seed, dims, config.train.kind);

  std::optional<privacy::Accountant> accountant;
  if (config.dp.enabled && config.dp.sigma > 0.0)
    accountant.emplace(config.accountant_q, config.dp.sigma, config.delta);

  RunResult result{global, {}, {}};
  for (int round = 1; round <= config.rounds; ++round) {
    Rng round_rng(derive_seed(config.seed, 0xF00D,
                              static_cast<std::uint64_t>(round)));
    std::vector<int> sampled = sample_clients(
        static_cast<int>(clients.size()), config.client_fraction, round_rng);

    std::vector<std::vector<Mat>> deltas;
    std::vector<double> weights;
    std::vector<double> losses;
    long max_steps = 0;
    for (int c : sampled) {
      ClientState& client = clients[static_cast<std::size_t>(c)];
      if (client.train_nodes.empty()) {
        std::cerr << "warning: round " << round << ": client " << client.id
                  << " has no training windows, skipped\n";
        continue;
      }
      LocalResult local = local_train(
          client, global, config.train, config.dp,
          derive_seed(config.seed, static_cast<std::uint64_t>(round),
                      static_cast<std::uint64_t>(c)));
      deltas.push_back(std::move(local.delta));
      weights.push_back(static_cast<double>(client.train_nodes.size()));
      losses.push_back(local.mean_loss);
      max_steps = std::max(max_steps, local.steps);
    }
    if (deltas.empty())
      throw StateError("run_federated: round " + std::to_string(round) +
                       " sampled no trainable clients");
    fedavg_aggregate(global, deltas,
                     config.weighted_aggregation ? &weights : nullptr);

    RoundReport report;
    report.round = round;
    report.sampled = sampled;
    report.train_loss_mean =
        std::accumulate(losses.begin(), losses.end(), 0.0) /
        static_cast<double>(losses.size());
    if (accountant) {
      accountant->step(config.dp.noise_every_step ? max_steps : 1);
      report.epsilon = accountant->epsilon();
      result.audit.push_back(AuditRow{round, accountant->alpha_star(),
                                      accountant->gamma_cum(),
                                      report.epsilon});
    } else {
      report.epsilon = std::numeric_limits<double>::infinity();
    }
    Evaluation e =
        evaluate_clients(clients, global, config.train.kind, config.classes);
    report.test_accuracy = e.accuracy;
    report.test_f1 = selected_f1(e, config.f1_average);
    result.rounds.push_back(std::move(report));
    if (config.round_hook) config.round_hook(round, global);
  }
  result.model = std::move(global);
  return result;
}

RunResult run_centralized(ClientState merged, const models::ModelDims& dims,
                          int epochs, FedRunConfig config) {
  config.rounds = epochs;
  config.train.local_epochs = 1;
  config.client_fraction = 1.0;
  config.weighted_aggregation = false;
  std::vector<ClientState> single;
  single.push_back(std::move(merged));
  return run_federated(single, dims, config);
}

}  // namespace fedgraph::fed
