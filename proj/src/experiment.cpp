#include "fedgraph/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include "fedgraph/csv.hpp"
#include "fedgraph/data/mex_io.hpp"
#include "fedgraph/data/modality.hpp"
#include "fedgraph/data/pipeline.hpp"
#include "fedgraph/data/synthetic.hpp"
#include "fedgraph/errors.hpp"
#include "fedgraph/eval/metrics.hpp"
#include "fedgraph/eval/testbed.hpp"
#include "fedgraph/fed/engine.hpp"
#include "fedgraph/graph/modality_graph.hpp"
#include "fedgraph/privacy/privacy.hpp"

namespace fs = std::filesystem;

namespace fedgraph::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fully resolved settings of one grid cell.
struct CellConfig {
  std::string mode = "federated";
  models::ModelKind kind = models::ModelKind::Gcn;
  std::vector<std::string> modalities;

  double lr = 0.01;
  int layers = 2;
  Index hidden = 64;
  double dropout = 0.5;
  int batch = 32;
  int local_epochs = 20;
  int rounds = 50;
  int epochs = 500;
  num::OptKind optimizer = num::OptKind::Adam;
  double client_fraction = 1.0;
  bool weighted_fedavg = false;

  bool dp = false;
  std::string epsilon_raw = "none";
  double epsilon_target = 0.0;
  double delta = 1e-3;
  double clip = 1.0;
  double sigma = 0.0;
  double q_dp = 0.01;
  bool noise_every_step = false;

  std::string source = "synthetic";
  std::string root;
  double train_fraction = 0.7;
  double window_s = 5.0;
  double stride_s = 2.0;
  Index dct_keep = 60;
  Index ae_hidden = 256;
  Index ae_latent = 64;
  int ae_epochs = 200;
  double ae_lr = 0.005;
  data::SyntheticSpec synth;
  double percentile = 10.0;
  bool modality_specific = true;
  eval::F1Average f1_average = eval::F1Average::Macro;

  std::uint64_t master = 42;
  int replicates = 1;
  std::string out_dir = "out";
  int checkpoint_every = 0;
  bool dump_graph = false;
};

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError("config key '" + key + "': " + why);
}

CellConfig resolve_cell(const ConfigMap& cfg) {
  CellConfig c;
  c.mode = cfg.get_string("mode", "federated");
  require(c.mode == "federated" || c.mode == "centralized", "mode",
          "expected federated or centralized, got '" + c.mode + "'");
  bool fed = c.mode == "federated";
  c.kind = models::parse_model_kind(cfg.get_string("model", "gcn"));

  c.modalities = cfg.get_list("modalities", {"act", "acw", "dc", "pm"});
  for (const std::string& m : c.modalities) data::modality_info(m);

  c.lr = cfg.get_double("training.lr", fed ? 0.01 : 0.001);
  require(c.lr > 0.0, "training.lr", "must be positive");
  c.layers = cfg.get_int("training.layers", 2);
  require(c.layers >= 1, "training.layers", "must be >= 1");
  c.hidden = cfg.get_long("training.hidden", fed ? 64 : 128);
  require(c.hidden >= 1, "training.hidden", "must be >= 1");
  c.dropout = cfg.get_double("training.dropout", 0.5);
  require(c.dropout >= 0.0 && c.dropout < 1.0, "training.dropout",
          "must be in [0, 1)");
  c.batch = cfg.get_int("training.batch", 32);
  require(c.batch >= 1, "training.batch", "must be >= 1");
  c.local_epochs = cfg.get_int("training.local_epochs", 20);
  require(c.local_epochs >= 1, "training.local_epochs", "must be >= 1");
  c.rounds = cfg.get_int("training.rounds", 50);
  require(c.rounds >= 1, "training.rounds", "must be >= 1");
  c.epochs = cfg.get_int("training.epochs", 500);
  require(c.epochs >= 1, "training.epochs", "must be >= 1");
  std::string opt = cfg.get_string("training.optimizer", "adam");
  require(opt == "adam" || opt == "sgd", "training.optimizer",
          "expected adam or sgd, got '" + opt + "'");
  c.optimizer = opt == "adam" ? num::OptKind::Adam : num::OptKind::Sgd;
  c.client_fraction = cfg.get_double("training.client_fraction", 1.0);
  require(c.client_fraction > 0.0 && c.client_fraction <= 1.0,
          "training.client_fraction", "must be in (0, 1]");
  c.weighted_fedavg = cfg.get_bool("training.weighted_fedavg", false);

  c.delta = cfg.get_double("privacy.delta", 1e-3);
  require(c.delta > 0.0 && c.delta < 1.0, "privacy.delta",
          "must be in (0, 1)");
  c.clip = cfg.get_clip("privacy.clip", 1.0);
  require(c.clip > 0.0, "privacy.clip", "must be positive");
  c.q_dp = cfg.get_double("privacy.q_dp", 0.01);
  require(c.q_dp > 0.0 && c.q_dp <= 1.0, "privacy.q_dp", "must be in (0, 1]");
  c.noise_every_step = cfg.get_bool("privacy.noise_every_step", false);
  c.epsilon_raw = cfg.get_string("privacy.epsilon", "none");

  long steps = fed ? c.rounds : c.epochs;
  if (cfg.has("privacy.sigma")) {
    c.sigma = cfg.get_double("privacy.sigma", 0.0);
    require(c.sigma >= 0.0, "privacy.sigma", "must be >= 0");
    require(c.epsilon_raw == "none", "privacy.epsilon",
            "cannot be combined with an explicit privacy.sigma");
    c.dp = true;
  } else if (c.epsilon_raw != "none") {
    double target = cfg.get_double("privacy.epsilon", 0.0);
    require(target > 0.0, "privacy.epsilon", "must be positive or 'none'");
    require(!c.noise_every_step, "privacy.noise_every_step",
            "per-step noise needs an explicit privacy.sigma");
    c.epsilon_target = target;
    c.sigma = privacy::calibrate_sigma(target, c.delta, c.q_dp, steps);
    c.dp = true;
  }
  if (c.dp && c.sigma > 0.0)
    require(std::isfinite(c.clip), "privacy.clip",
            "must be finite when noise is added");

  c.source = cfg.get_string("data.source", "synthetic");
  require(c.source == "synthetic" || c.source == "mex", "data.source",
          "expected synthetic or mex, got '" + c.source + "'");
  c.root = cfg.get_string("data.root", "");
  if (c.source == "mex")
    require(!c.root.empty(), "data.root", "required for data.source = mex");
  c.train_fraction = cfg.get_double("data.train_fraction", 0.7);
  require(c.train_fraction > 0.0 && c.train_fraction < 1.0,
          "data.train_fraction", "must be in (0, 1)");
  c.window_s = cfg.get_double("data.window_seconds", 5.0);
  c.stride_s = cfg.get_double("data.stride_seconds", 2.0);
  require(c.window_s > 0.0 && c.stride_s > 0.0 && c.stride_s <= c.window_s,
          "data.stride_seconds", "need 0 < stride <= window");
  c.dct_keep = cfg.get_long("data.dct_keep", 60);
  require(c.dct_keep >= 1, "data.dct_keep", "must be >= 1");
  c.ae_hidden = cfg.get_long("data.ae_hidden", 256);
  c.ae_latent = cfg.get_long("data.ae_latent", 64);
  c.ae_epochs = cfg.get_int("data.ae_epochs", 200);
  c.ae_lr = cfg.get_double("data.ae_lr", 0.005);
  require(c.ae_hidden >= 1 && c.ae_latent >= 1 && c.ae_epochs >= 1 &&
              c.ae_lr > 0.0,
          "data.ae_hidden", "autoencoder settings must be positive");

  c.synth.clients = cfg.get_int("data.synthetic.clients", 5);
  c.synth.classes = cfg.get_int("data.synthetic.classes", 3);
  c.synth.windows_per_class = cfg.get_int("data.synthetic.windows_per_class", 10);
  c.synth.windows_per_client = cfg.get_int("data.synthetic.windows_per_client", 0);
  c.synth.separation = cfg.get_double("data.synthetic.separation", 3.0);
  c.synth.noise = cfg.get_double("data.synthetic.noise", 1.0);
  c.synth.modalities = c.modalities;
  c.synth.dims.clear();
  if (cfg.has("data.synthetic.dims")) {
    auto dims = cfg.get_list("data.synthetic.dims", {});
    require(dims.size() == c.modalities.size(), "data.synthetic.dims",
            "need one dim per modality");
    for (const std::string& d : dims)
      c.synth.dims.push_back(static_cast<Index>(std::stol(d)));
  } else {
    for (const std::string& m : c.modalities) {
      const data::ModalityInfo& info = data::modality_info(m);
      c.synth.dims.push_back(info.image ? c.ae_latent
                                        : info.channels * c.dct_keep);
    }
  }
  if (c.source == "synthetic") data::validate_synthetic_spec(c.synth);

  c.percentile = cfg.get_double("graph.threshold_percentile", 10.0);
  require(c.percentile >= 0.0 && c.percentile <= 100.0,
          "graph.threshold_percentile", "must be in [0, 100]");
  c.modality_specific = cfg.get_bool("graph.modality_specific", true);

  std::string f1avg = cfg.get_string("eval.f1_average", "macro");
  require(f1avg == "macro" || f1avg == "micro" || f1avg == "weighted",
          "eval.f1_average",
          "expected macro, micro or weighted, got '" + f1avg + "'");
  c.f1_average = eval::parse_f1_average(f1avg);

  c.master = cfg.get_seed("seed.master", 42);
  c.replicates = cfg.get_int("seed.replicates", 1);
  require(c.replicates >= 1, "seed.replicates", "must be >= 1");
  c.out_dir = cfg.get_string("output.dir", "out");
  c.checkpoint_every = cfg.get_int("output.checkpoint_every", 0);
  require(c.checkpoint_every >= 0, "output.checkpoint_every",
          "must be >= 0");
  c.dump_graph = cfg.get_bool("output.dump_graph", false);
  return c;
}

// Everything the engine needs for one replicate.
struct BuiltData {
  std::vector<fed::ClientState> clients;
  models::ModelDims dims;
  int classes = 0;
};

// All modalities concatenated column-wise, for the shared-graph option.
Mat stacked_features(const data::WindowSet& windows) {
  Index cols = 0;
  for (const Mat& f : windows.features) cols += f.cols();
  Mat all(windows.size(), cols);
  Index at = 0;
  for (const Mat& f : windows.features) {
    all.middleCols(at, f.cols()) = f;
    at += f.cols();
  }
  return all;
}

void attach_graphs(fed::ClientState& client, const CellConfig& cell) {
  client.a_hats.clear();
  if (!cell.modality_specific) {
    graph::ModalityGraph g = graph::build_graph(
        stacked_features(client.windows), client.windows.recording_ids,
        client.windows.window_index, cell.percentile, &client.train_nodes);
    client.a_hats.assign(client.windows.features.size(), g.a_hat);
    return;
  }
  for (std::size_t m = 0; m < client.windows.features.size(); ++m) {
    graph::ModalityGraph g = graph::build_graph(
        client.windows.features[m], client.windows.recording_ids,
        client.windows.window_index, cell.percentile, &client.train_nodes);
    client.a_hats.push_back(std::move(g.a_hat));
  }
}

BuiltData build_data(const CellConfig& cell,
                     const std::vector<data::ClientRecordings>* raw,
                     std::uint64_t seed) {
  BuiltData built;
  if (cell.source == "synthetic") {
    data::SyntheticSpec spec = cell.synth;
    spec.seed = seed;
    std::vector<data::WindowSet> sets = data::generate_synthetic(spec);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      fed::ClientState client;
      client.id = static_cast<int>(i);
      client.windows = std::move(sets[i]);
      auto [train, test] = data::split_indices(
          client.windows.labels, cell.train_fraction,
          derive_seed(seed, 500, static_cast<std::uint64_t>(i)));
      client.train_nodes = std::move(train);
      client.test_nodes = std::move(test);
      built.clients.push_back(std::move(client));
    }
  } else {
    data::PipelineConfig pc;
    pc.modalities = cell.modalities;
    pc.window_s = cell.window_s;
    pc.stride_s = cell.stride_s;
    pc.dct_keep = cell.dct_keep;
    pc.ae_hidden = cell.ae_hidden;
    pc.ae_latent = cell.ae_latent;
    pc.ae_epochs = cell.ae_epochs;
    pc.ae_lr = cell.ae_lr;
    pc.train_fraction = cell.train_fraction;
    pc.seed = seed;
    int id = 0;
    for (const data::ClientRecordings& rec : *raw) {
      data::ClientWindows cw = data::build_client_windows(rec, pc);
      fed::ClientState client;
      client.id = id++;
      client.windows = std::move(cw.windows);
      client.train_nodes = std::move(cw.train_idx);
      client.test_nodes = std::move(cw.test_idx);
      built.clients.push_back(std::move(client));
    }
  }

  if (cell.mode == "centralized") {
    fed::ClientState merged;
    merged.id = 0;
    std::vector<Index> train, test;
    for (fed::ClientState& client : built.clients) {
      Index offset = merged.windows.size();
      data::append_windows(merged.windows, client.windows);
      for (Index i : client.train_nodes) train.push_back(i + offset);
      for (Index i : client.test_nodes) test.push_back(i + offset);
    }
    merged.windows.client_id = "all";
    merged.train_nodes = std::move(train);
    merged.test_nodes = std::move(test);
    built.clients.clear();
    built.clients.push_back(std::move(merged));
  }

  int classes = 0;
  for (const fed::ClientState& client : built.clients)
    for (int label : client.windows.labels)
      classes = std::max(classes, label + 1);
  built.classes = std::max(classes, 2);

  built.dims.modalities = cell.modalities;
  for (std::size_t m = 0; m < cell.modalities.size(); ++m) {
    Index width = built.clients[0].windows.features[m].cols();
    for (const fed::ClientState& client : built.clients)
      if (client.windows.features[m].cols() != width)
        throw StateError("clients disagree on feature width for modality " +
                         cell.modalities[m]);
    built.dims.input_dims.push_back(width);
  }
  built.dims.hidden = cell.hidden;
  built.dims.classes = built.classes;
  built.dims.layers = cell.layers;
  built.dims.dropout = cell.dropout;

  if (cell.kind == models::ModelKind::Gcn)
    for (fed::ClientState& client : built.clients)
      attach_graphs(client, cell);
  return built;
}

class Manifest {
 public:
  explicit Manifest(const fs::path& root) : root_(root) {}

  void add(const fs::path& path, const std::string& what) {
    entries_.push_back(
        {fs::relative(path, root_).generic_string(), what});
  }

  void write() const {
    std::ofstream out(root_ / "MANIFEST");
    if (!out) throw IoError("cannot write MANIFEST under " + root_.string());
    for (const auto& [rel, what] : entries_) out << rel << " - " << what << '\n';
  }

 private:
  fs::path root_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_effective_config(const fs::path& path, const ConfigMap& cfg,
                            const CellConfig& cell) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::map<std::string, std::string> values = cfg.values();
  values["mode"] = cell.mode;
  values["model"] = models::model_kind_name(cell.kind);
  values["training.lr"] = format_double(cell.lr);
  values["training.hidden"] = std::to_string(cell.hidden);
  if (cell.dp) values["privacy.sigma"] = format_double(cell.sigma);
  for (const auto& [k, v] : values) out << k << " = " << v << '\n';
}

void write_metrics_csv(const fs::path& path,
                       const std::vector<fed::RoundReport>& rounds) {
  CsvWriter w(path.string());
  w.row("round", "epsilon", "train_loss_mean", "test_accuracy", "test_f1");
  for (const fed::RoundReport& r : rounds)
    w.row(r.round, r.epsilon, r.train_loss_mean, r.test_accuracy, r.test_f1);
}

void write_audit_csv(const fs::path& path,
                     const std::vector<fed::AuditRow>& audit) {
  CsvWriter w(path.string());
  w.row("round", "alpha_star", "gamma_cum", "epsilon_spent");
  for (const fed::AuditRow& r : audit)
    w.row(r.round, r.alpha_star, r.gamma_cum, r.epsilon_spent);
}

void write_confusion_csv(const fs::path& path, const Eigen::MatrixXi& counts) {
  CsvWriter w(path.string());
  std::vector<std::string> header{"true_class"};
  for (Index c = 0; c < counts.cols(); ++c)
    header.push_back("pred_" + std::to_string(c));
  w.raw_row(header);
  for (Index r = 0; r < counts.rows(); ++r) {
    std::vector<std::string> row{std::to_string(r)};
    for (Index c = 0; c < counts.cols(); ++c)
      row.push_back(std::to_string(counts(r, c)));
    w.raw_row(row);
  }
}

void write_embeddings_csv(const fs::path& path,
                          const std::vector<fed::ClientState>& clients,
                          const models::ModelParams& params,
                          models::ModelKind kind) {
  CsvWriter w(path.string());
  std::vector<std::string> header{"node_id", "label"};
  for (Index h = 1; h <= params.dims.hidden; ++h)
    header.push_back("h" + std::to_string(h));
  w.raw_row(header);
  long node_id = 0;
  for (const fed::ClientState& client : clients) {
    std::vector<const Mat*> adj(client.windows.features.size(), nullptr);
    if (kind == models::ModelKind::Gcn)
      for (std::size_t m = 0; m < adj.size(); ++m) adj[m] = &client.a_hats[m];
    models::Prediction p =
        models::gcn_forward(params, adj, client.windows.features);
    for (Index i = 0; i < p.fused.rows(); ++i) {
      std::vector<std::string> row{std::to_string(node_id++),
                                   std::to_string(client.windows.labels
                                                      [static_cast<std::size_t>(
                                                          i)])};
      for (Index h = 0; h < p.fused.cols(); ++h)
        row.push_back(format_double(p.fused(i, h)));
      w.raw_row(row);
    }
  }
}

void write_edges_csv(const fs::path& path,
                     const std::vector<fed::ClientState>& clients,
                     const CellConfig& cell) {
  CsvWriter w(path.string());
  w.row("client", "modality", "i", "j");
  for (const fed::ClientState& client : clients) {
    if (!cell.modality_specific) {
      graph::ModalityGraph g = graph::build_graph(
          stacked_features(client.windows), client.windows.recording_ids,
          client.windows.window_index, cell.percentile, &client.train_nodes);
      for (const auto& e : g.edges) w.row(client.id, "all", e[0], e[1]);
      continue;
    }
    for (std::size_t m = 0; m < client.windows.features.size(); ++m) {
      graph::ModalityGraph g = graph::build_graph(
          client.windows.features[m], client.windows.recording_ids,
          client.windows.window_index, cell.percentile, &client.train_nodes);
      for (const auto& e : g.edges)
        w.row(client.id, client.windows.modalities[m], e[0], e[1]);
    }
  }
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  return out;
}

std::string cell_dir_name(std::size_t idx, const GridCell& cell) {
  std::string name = "cell_" + std::to_string(idx);
  for (const auto& [k, v] : cell.assignment)
    name += "_" + sanitize(k) + "=" + sanitize(v);
  return name;
}

// Reference lookup key: everything but the privacy strength.
std::string reference_key(const ConfigMap& cfg, int replicate) {
  std::ostringstream key;
  for (const auto& [k, v] : cfg.values()) {
    if (k == "privacy.epsilon" || k == "privacy.sigma") continue;
    key << k << '=' << v << ';';
  }
  key << "replicate=" << replicate;
  return key.str();
}

}  // namespace

ExperimentResult run_experiment(const ConfigMap& config,
                                const std::string& out_override) {
  std::vector<GridCell> cells = expand_sweeps(config);
  CellConfig first = resolve_cell(cells[0].config);
  fs::path out(out_override.empty() ? first.out_dir : out_override);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  Manifest manifest(out);

  // Raw recordings are immutable across cells and replicates.
  std::map<std::string, std::vector<data::ClientRecordings>> raw_cache;

  ExperimentResult result;
  result.out_dir = out.string();
  struct CellOutcome {
    SummaryRow row;
    std::string ref_key;
    double final_accuracy = 0.0;
  };
  std::vector<CellOutcome> outcomes;

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellConfig cell = resolve_cell(cells[ci].config);
    std::string cell_name = cell_dir_name(ci, cells[ci]);
    fs::path cell_dir = out / cell_name;
    fs::create_directories(cell_dir);
    write_effective_config(cell_dir / "config.effective", cells[ci].config,
                           cell);
    manifest.add(cell_dir / "config.effective",
                 "resolved configuration for " + cell_name);

    const std::vector<data::ClientRecordings>* raw = nullptr;
    if (cell.source == "mex") {
      auto it = raw_cache.find(cell.root);
      if (it == raw_cache.end())
        it = raw_cache
                 .emplace(cell.root,
                          data::load_mex_layout(cell.root, cell.modalities))
                 .first;
      raw = &it->second;
    }

    for (int rep = 0; rep < cell.replicates; ++rep) {
      std::uint64_t seed = cell.master + static_cast<std::uint64_t>(rep);
      fs::path rep_dir =
          cell.replicates > 1 ? cell_dir / ("rep" + std::to_string(rep))
                              : cell_dir;
      fs::create_directories(rep_dir);

      BuiltData built = build_data(cell, raw, seed);

      fed::FedRunConfig run;
      run.train.kind = cell.kind;
      run.train.optimizer.kind = cell.optimizer;
      run.train.optimizer.lr = cell.lr;
      run.train.local_epochs = cell.local_epochs;
      run.train.batch = cell.batch;
      run.dp.enabled = cell.dp;
      run.dp.clip = cell.clip;
      run.dp.sigma = cell.sigma;
      run.dp.noise_every_step = cell.noise_every_step;
      run.rounds = cell.rounds;
      run.client_fraction = cell.client_fraction;
      run.weighted_aggregation = cell.weighted_fedavg;
      run.accountant_q = cell.q_dp;
      run.delta = cell.delta;
      run.classes = built.classes;
      run.f1_average = cell.f1_average;
      run.seed = seed;
      if (cell.checkpoint_every > 0) {
        fs::path ckpt_dir = rep_dir / "checkpoints";
        fs::create_directories(ckpt_dir);
        int every = cell.checkpoint_every;
        run.round_hook = [ckpt_dir, every](int round,
                                           const models::ModelParams& m) {
          if (round % every == 0)
            models::save_params(
                m, (ckpt_dir / ("round_" + std::to_string(round) + ".params"))
                       .string());
        };
      }

      fed::RunResult res =
          cell.mode == "federated"
              ? fed::run_federated(built.clients, built.dims, run)
              : fed::run_centralized(built.clients[0], built.dims,
                                     cell.epochs, run);

      write_metrics_csv(rep_dir / "metrics.csv", res.rounds);
      manifest.add(rep_dir / "metrics.csv", "per-round metrics");
      if (!res.audit.empty()) {
        write_audit_csv(rep_dir / "accountant.csv", res.audit);
        manifest.add(rep_dir / "accountant.csv", "privacy accounting audit");
      }
      models::save_params(res.model, (rep_dir / "model.params").string());
      manifest.add(rep_dir / "model.params", "final model weights");

      fed::Evaluation final_eval = fed::evaluate_clients(
          built.clients, res.model, cell.kind, built.classes);
      write_confusion_csv(rep_dir / "confusion.csv", final_eval.confusion);
      manifest.add(rep_dir / "confusion.csv", "test confusion matrix");
      {
        CsvWriter w((rep_dir / "f1.csv").string());
        w.row("average", "score");
        w.row("macro", final_eval.macro_f1);
        w.row("weighted", final_eval.weighted_f1);
        w.row("micro", final_eval.micro_f1);
      }
      manifest.add(rep_dir / "f1.csv", "final F1 under each averaging scheme");
      write_embeddings_csv(rep_dir / "embeddings.csv", built.clients,
                           res.model, cell.kind);
      manifest.add(rep_dir / "embeddings.csv", "fused node embeddings");
      if (cell.dump_graph && cell.kind == models::ModelKind::Gcn) {
        write_edges_csv(rep_dir / "edges.csv", built.clients, cell);
        manifest.add(rep_dir / "edges.csv", "graph edge lists");
      }

      const fed::RoundReport& last = res.rounds.back();
      CellOutcome outcome;
      outcome.row.cell = cell_name;
      outcome.row.replicate = rep;
      outcome.row.model = models::model_kind_name(cell.kind);
      outcome.row.setting = cell.mode;
      outcome.row.epsilon = std::isfinite(last.epsilon)
                                ? format_double(last.epsilon)
                                : "none";
      outcome.row.accuracy = last.test_accuracy;
      outcome.row.f1 = last.test_f1;
      outcome.row.utility_loss = std::numeric_limits<double>::quiet_NaN();
      outcome.ref_key = reference_key(cells[ci].config, rep);
      outcome.final_accuracy = last.test_accuracy;
      outcomes.push_back(std::move(outcome));
    }
  }

  // Utility loss against the matching no-privacy cell.
  std::map<std::string, double> reference_acc;
  for (const CellOutcome& o : outcomes)
    if (o.row.epsilon == "none") reference_acc[o.ref_key] = o.final_accuracy;
  for (CellOutcome& o : outcomes) {
    auto it = reference_acc.find(o.ref_key);
    if (o.row.epsilon != "none" && it != reference_acc.end() &&
        it->second > 0.0)
      o.row.utility_loss = eval::utility_loss(o.final_accuracy, it->second);
  }

  CsvWriter summary((out / "summary.csv").string());
  summary.row("model", "setting", "epsilon", "accuracy", "f1", "utility_loss");
  for (const CellOutcome& o : outcomes) {
    summary.row(o.row.model, o.row.setting, o.row.epsilon, o.row.accuracy,
                o.row.f1, o.row.utility_loss);
    result.summary.push_back(o.row);
  }
  manifest.add(out / "summary.csv", "final metrics per cell and replicate");

  // Median utility per DP cell across replicates.
  std::map<std::string, std::vector<double>> utilities;
  std::map<std::string, std::pair<std::string, std::string>> cell_meta;
  for (const CellOutcome& o : outcomes) {
    if (o.row.epsilon == "none" || std::isnan(o.row.utility_loss)) continue;
    std::string key = o.row.epsilon + "|" + o.row.setting + "|" + o.row.model;
    utilities[key].push_back(o.row.utility_loss);
    cell_meta[key] = {o.row.setting, o.row.model};
  }
  if (!utilities.empty()) {
    CsvWriter util((out / "utility_loss.csv").string());
    util.row("epsilon", "setting", "model", "utility_loss");
    for (auto& [key, values] : utilities) {
      std::sort(values.begin(), values.end());
      double median = values[values.size() / 2];
      if (values.size() % 2 == 0)
        median = 0.5 * (median + values[values.size() / 2 - 1]);
      std::string epsilon = key.substr(0, key.find('|'));
      util.row(epsilon, cell_meta[key].first, cell_meta[key].second, median);
    }
    manifest.add(out / "utility_loss.csv",
                 "median utility loss per privacy level");
  }

  manifest.write();
  return result;
}

DatasetResult generate_dataset(const ConfigMap& config,
                               const std::string& out_override) {
  data::SyntheticRawSpec spec;
  spec.clients = config.get_int("data.synthetic.clients", 5);
  spec.classes = config.get_int("data.synthetic.classes", 7);
  spec.repetitions = config.get_int("data.synthetic.repetitions", 1);
  spec.duration_s = config.get_double("data.synthetic.duration_seconds", 20.0);
  spec.noise = config.get_double("data.synthetic.raw_noise", 0.25);
  spec.seed = config.get_seed("seed.master", 42);

  fs::path out(out_override.empty() ? config.get_string("output.dir", "out")
                                    : out_override);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  std::vector<data::RawRecording> recs = data::generate_synthetic_raw(spec);
  data::write_mex_layout(out.string(), recs);

  Manifest manifest(out);
  for (const data::RawRecording& rec : recs)
    manifest.add(out / rec.modality / rec.client_id /
                     (std::to_string(rec.label + 1) + "_" +
                      std::to_string(rec.repetition) + ".csv"),
                 "raw " + rec.modality + " recording");
  manifest.write();
  return DatasetResult{out.string(), recs.size()};
}

TestbedStats run_testbed(const ConfigMap& config,
                         const std::string& out_override) {
  eval::BoundParams p;
  p.mu = config.get_double("testbed.mu", 1.0);
  p.eta = config.get_double("testbed.eta", 0.1);
  p.sigma = config.get_double("testbed.sigma", 0.0);
  p.clip = config.get_clip("testbed.clip", 1.0);
  p.d = config.get_long("testbed.dim", 1);
  p.m = config.get_int("testbed.sampled", 1);
  p.batch = config.get_int("testbed.batch", 1);
  p.zeta = config.get_double("testbed.zeta", 0.0);
  p.sigma_g = config.get_double("testbed.sigma_g", 0.0);
  int clients = config.get_int("testbed.clients", 5);
  int rounds = config.get_int("testbed.rounds", 400);
  int replicates = config.get_int("testbed.replicates", 20);
  double w0 = config.get_double("testbed.w0", 20.0);
  std::uint64_t seed = config.get_seed("seed.master", 42);

  eval::TestbedResult res =
      eval::quadratic_testbed(p, clients, rounds, seed, replicates, w0);

  fs::path out(out_override.empty() ? config.get_string("output.dir", "out")
                                    : out_override);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  CsvWriter w((out / "testbed.csv").string());
  w.row("round", "mean_sq_dist", "floor_theoretical");
  for (std::size_t r = 0; r < res.mean_sq_dist.size(); ++r)
    w.row(static_cast<long>(r), res.mean_sq_dist[r], res.floor);
  Manifest manifest(out);
  manifest.add(out / "testbed.csv", "quadratic testbed trajectory");
  manifest.write();

  std::size_t tail = std::max<std::size_t>(1, res.mean_sq_dist.size() / 5);
  double plateau = 0.0;
  for (std::size_t r = res.mean_sq_dist.size() - tail;
       r < res.mean_sq_dist.size(); ++r)
    plateau += res.mean_sq_dist[r];
  plateau /= static_cast<double>(tail);
  return TestbedStats{out.string(), plateau, res.floor};
}

}  // namespace fedgraph::cli
