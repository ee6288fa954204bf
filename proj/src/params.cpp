#include "fedgraph/models/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fedgraph/csv.hpp"
#include "fedgraph/errors.hpp"
#include "fedgraph/rng.hpp"

namespace fedgraph::models {

ModelKind parse_model_kind(const std::string& name) {
  if (name == "gcn") return ModelKind::Gcn;
  if (name == "ffn") return ModelKind::Ffn;
  throw ConfigError("model: unknown kind '" + name + "' (gcn or ffn)");
}

std::string model_kind_name(ModelKind kind) {
  return kind == ModelKind::Gcn ? "gcn" : "ffn";
}

void validate_dims(const ModelDims& dims) {
  if (dims.modalities.empty())
    throw ParamError("model dims: no modalities");
  if (dims.modalities.size() != dims.input_dims.size())
    throw ShapeError("model dims: " + std::to_string(dims.modalities.size()) +
                     " modalities for " +
                     std::to_string(dims.input_dims.size()) + " input dims");
  for (Index d : dims.input_dims)
    if (d <= 0) throw ParamError("model dims: input dims must be positive");
  if (dims.hidden <= 0) throw ParamError("model dims: hidden must be >= 1");
  if (dims.classes < 2) throw ParamError("model dims: need >= 2 classes");
  if (dims.layers < 1) throw ParamError("model dims: need >= 1 layer");
  if (!(dims.dropout >= 0.0 && dims.dropout < 1.0))
    throw ParamError("model dims: dropout " + std::to_string(dims.dropout) +
                     " outside [0, 1)");
}

namespace {

Mat glorot(Index rows, Index cols, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> unif(-limit, limit);
  Mat w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = unif(rng);
  return w;
}

}  // namespace

ModelParams init_params(std::uint64_t seed, const ModelDims& dims,
                        ModelKind kind) {
  (void)kind;
  validate_dims(dims);
  Rng rng(derive_seed(seed, 0x1217));

  ModelParams p;
  p.dims = dims;
  auto push = [&p](const std::string& name, Mat t) {
    p.names.push_back(name);
    p.tensors.push_back(std::move(t));
  };
  for (std::size_t m = 0; m < dims.modalities.size(); ++m) {
    const std::string& mod = dims.modalities[m];
    for (int l = 0; l < dims.layers; ++l) {
      Index in = l == 0 ? dims.input_dims[m] : dims.hidden;
      std::string prefix = mod + ".l" + std::to_string(l) + ".";
      push(prefix + "prop_w", glorot(in, dims.hidden, rng));
      push(prefix + "self_w", glorot(in, dims.hidden, rng));
      push(prefix + "ln_gain", Mat::Ones(1, dims.hidden));
      push(prefix + "ln_bias", Mat::Zero(1, dims.hidden));
    }
    push(mod + ".attn_w", glorot(dims.hidden, 1, rng));
    push(mod + ".attn_b", Mat::Zero(1, 1));
  }
  push("cls.w", glorot(dims.hidden, dims.classes, rng));
  push("cls.b", Mat::Zero(1, dims.classes));
  return p;
}

Index ModelParams::numel() const {
  Index n = 0;
  for (const Mat& t : tensors) n += t.size();
  return n;
}

Mat& ModelParams::tensor(const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tensors[i];
  throw IndexError("model params: no tensor named " + name);
}

const Mat& ModelParams::tensor(const std::string& name) const {
  return const_cast<ModelParams*>(this)->tensor(name);
}

Vec flatten_tensors(const std::vector<Mat>& tensors) {
  Index total = 0;
  for (const Mat& t : tensors) total += t.size();
  Vec flat(total);
  Index off = 0;
  for (const Mat& t : tensors) {
    flat.segment(off, t.size()) = Eigen::Map<const Vec>(t.data(), t.size());
    off += t.size();
  }
  return flat;
}

void unflatten_tensors(const Vec& flat, std::vector<Mat>& tensors) {
  Index total = 0;
  for (const Mat& t : tensors) total += t.size();
  if (flat.size() != total)
    throw ShapeError("unflatten: " + std::to_string(flat.size()) +
                     " values for " + std::to_string(total) + " slots");
  Index off = 0;
  for (Mat& t : tensors) {
    Eigen::Map<Vec>(t.data(), t.size()) = flat.segment(off, t.size());
    off += t.size();
  }
}

Vec ModelParams::flatten() const { return flatten_tensors(tensors); }

void ModelParams::unflatten(const Vec& flat) {
  unflatten_tensors(flat, tensors);
}

void save_params(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "fedgraph-params 1\n";
  out << "modalities";
  for (const auto& m : params.dims.modalities) out << ' ' << m;
  out << "\ninput_dims";
  for (Index d : params.dims.input_dims) out << ' ' << d;
  out << "\nhidden " << params.dims.hidden << "\nclasses "
      << params.dims.classes << "\nlayers " << params.dims.layers
      << "\ndropout " << format_double(params.dims.dropout) << "\n";
  for (std::size_t i = 0; i < params.names.size(); ++i) {
    const Mat& t = params.tensors[i];
    out << params.names[i] << ' ' << t.rows() << ' ' << t.cols();
    for (Index c = 0; c < t.cols(); ++c)
      for (Index r = 0; r < t.rows(); ++r)
        out << ' ' << format_double(t(r, c));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line))
      throw ParseError(path + ": truncated before " + std::string(what));
    return std::istringstream(line);
  };

  {
    auto s = next_line("magic");
    std::string magic;
    int version = 0;
    s >> magic >> version;
    if (magic != "fedgraph-params" || version != 1)
      throw ParseError(path + ": not a parameter file");
  }
  ModelParams p;
  {
    auto s = next_line("modalities");
    std::string key, m;
    s >> key;
    while (s >> m) p.dims.modalities.push_back(m);
  }
  {
    auto s = next_line("input_dims");
    std::string key;
    Index d;
    s >> key;
    while (s >> d) p.dims.input_dims.push_back(d);
  }
  auto scalar_line = [&](const char* what) {
    auto s = next_line(what);
    std::string key;
    double v;
    if (!(s >> key >> v)) throw ParseError(path + ": bad " + std::string(what));
    return v;
  };
  p.dims.hidden = static_cast<Index>(scalar_line("hidden"));
  p.dims.classes = static_cast<int>(scalar_line("classes"));
  p.dims.layers = static_cast<int>(scalar_line("layers"));
  p.dims.dropout = scalar_line("dropout");
  validate_dims(p.dims);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string name;
    Index rows, cols;
    if (!(s >> name >> rows >> cols))
      throw ParseError(path + ": bad tensor header: " + line);
    Mat t(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r)
        if (!(s >> t(r, c)))
          throw ParseError(path + ": truncated tensor " + name);
    p.names.push_back(name);
    p.tensors.push_back(std::move(t));
  }
  if (p.names.empty()) throw ParseError(path + ": no tensors");
  return p;
}

}  // namespace fedgraph::models
