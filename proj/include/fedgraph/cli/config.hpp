#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fedgraph::cli {

// Flat `key = value` configuration with `#` comments. Keys are dotted
// paths validated against the known-key registry; `sweep.<key> = a,b,c`
// requests a grid over that key.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap from_file(const std::string& path);
  static ConfigMap from_string(const std::string& text,
                               const std::string& origin = "<config>");

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    std::vector<std::string> fallback) const;
  // Accepts "inf"/"none" as infinity for clipping bounds.
  double get_clip(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<config>";
};

// All grid cells implied by the sweep.* keys, in deterministic order
// (Cartesian product, first sweep key slowest). A config without sweeps
// expands to itself. Each cell also reports its swept key=value pairs.
struct GridCell {
  ConfigMap config;
  std::vector<std::pair<std::string, std::string>> assignment;
};

std::vector<GridCell> expand_sweeps(const ConfigMap& base);

}  // namespace fedgraph::cli
