#include "fedgraph/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "fedgraph/errors.hpp"

namespace fedgraph::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "mode",
      "model",
      "modalities",
      "seed.master",
      "seed.replicates",
      "output.dir",
      "output.checkpoint_every",
      "output.dump_graph",
      "privacy.epsilon",
      "privacy.delta",
      "privacy.clip",
      "privacy.sigma",
      "privacy.q_dp",
      "privacy.noise_every_step",
      "training.lr",
      "training.layers",
      "training.hidden",
      "training.dropout",
      "training.batch",
      "training.local_epochs",
      "training.rounds",
      "training.epochs",
      "training.optimizer",
      "training.client_fraction",
      "training.weighted_fedavg",
      "data.source",
      "data.root",
      "data.train_fraction",
      "data.window_seconds",
      "data.stride_seconds",
      "data.dct_keep",
      "data.ae_hidden",
      "data.ae_latent",
      "data.ae_epochs",
      "data.ae_lr",
      "data.synthetic.clients",
      "data.synthetic.classes",
      "data.synthetic.windows_per_class",
      "data.synthetic.windows_per_client",
      "data.synthetic.dims",
      "data.synthetic.separation",
      "data.synthetic.noise",
      "data.synthetic.repetitions",
      "data.synthetic.duration_seconds",
      "data.synthetic.raw_noise",
      "graph.threshold_percentile",
      "graph.modality_specific",
      "eval.f1_average",
      "testbed.mu",
      "testbed.eta",
      "testbed.sigma",
      "testbed.clip",
      "testbed.dim",
      "testbed.clients",
      "testbed.sampled",
      "testbed.rounds",
      "testbed.replicates",
      "testbed.zeta",
      "testbed.sigma_g",
      "testbed.batch",
      "testbed.w0",
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void check_key(const std::string& key, const std::string& origin,
               std::size_t line) {
  std::string base = key;
  if (base.rfind("sweep.", 0) == 0) base = base.substr(6);
  if (!known_keys().count(base))
    throw SchemaError(origin + ":" + std::to_string(line) +
                      ": unknown config key '" + key + "'");
}

}  // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

ConfigMap ConfigMap::from_string(const std::string& text,
                                 const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
    check_key(key, origin, lineno);
    if (cfg.values_.count(key))
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

bool ConfigMap::has(const std::string& key) const {
  return values_.count(key) > 0;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" +
                      it->second + "'");
  }
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_long(key, fallback));
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" +
                      it->second + "'");
  }
}

std::uint64_t ConfigMap::get_seed(const std::string& key,
                                  std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a seed: '" + it->second +
                      "'");
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + it->second +
                    "'");
}

std::vector<std::string> ConfigMap::get_list(
    const std::string& key, std::vector<std::string> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  std::string token;
  std::istringstream s(it->second);
  while (std::getline(s, token, ',')) {
    token = trim(token);
    if (token.empty())
      throw ConfigError("config key '" + key + "': empty list element");
    out.push_back(token);
  }
  if (out.empty())
    throw ConfigError("config key '" + key + "': empty list");
  return out;
}

double ConfigMap::get_clip(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "inf" || it->second == "none")
    return std::numeric_limits<double>::infinity();
  return get_double(key, fallback);
}

std::vector<GridCell> expand_sweeps(const ConfigMap& base) {
  std::vector<std::pair<std::string, std::vector<std::string>>> sweeps;
  ConfigMap stripped;
  for (const auto& [key, value] : base.values()) {
    if (key.rfind("sweep.", 0) == 0) {
      std::string target = key.substr(6);
      if (base.has(target))
        throw ConfigError("config key '" + target +
                          "' is both set and swept");
      sweeps.push_back({target, base.get_list(key, {})});
    } else {
      stripped.set(key, value);
    }
  }
  std::vector<GridCell> cells{GridCell{stripped, {}}};
  for (const auto& [target, options] : sweeps) {
    std::vector<GridCell> next;
    for (const GridCell& cell : cells)
      for (const std::string& option : options) {
        GridCell expanded = cell;
        expanded.config.set(target, option);
        expanded.assignment.push_back({target, option});
        next.push_back(std::move(expanded));
      }
    cells = std::move(next);
  }
  return cells;
}

}  // namespace fedgraph::cli
