#include "fedgraph/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fedgraph/data/modality.hpp"
#include "fedgraph/errors.hpp"
#include "fedgraph/rng.hpp"

namespace fedgraph::data {

namespace {

Vec gaussian_vec(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// Dirichlet(alpha) proportions via normalized Gamma draws.
std::vector<double> dirichlet(int k, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& v : p) {
    v = gamma(rng);
    total += v;
  }
  if (total <= 0.0) return std::vector<double>(p.size(), 1.0 / k);
  for (double& v : p) v /= total;
  return p;
}

// Integer class counts that sum to `total`, follow the proportions, and
// give every class at least two windows when the budget allows it.
std::vector<int> allocate_counts(const std::vector<double>& props, int total,
                                 Rng&) {
  int k = static_cast<int>(props.size());
  std::vector<int> counts(props.size());
  int assigned = 0;
  std::vector<std::pair<double, int>> remainders;
  for (int c = 0; c < k; ++c) {
    double exact = props[static_cast<std::size_t>(c)] * total;
    counts[static_cast<std::size_t>(c)] = static_cast<int>(std::floor(exact));
    assigned += counts[static_cast<std::size_t>(c)];
    remainders.push_back({exact - std::floor(exact), c});
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  for (int i = 0; i < total - assigned; ++i)
    counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(i)]
                                        .second)] += 1;

  int floor_per_class = total >= 2 * k ? 2 : (total >= k ? 1 : 0);
  for (int c = 0; c < k; ++c) {
    while (counts[static_cast<std::size_t>(c)] < floor_per_class) {
      auto richest = std::max_element(counts.begin(), counts.end());
      if (*richest <= floor_per_class) break;
      *richest -= 1;
      counts[static_cast<std::size_t>(c)] += 1;
    }
  }
  return counts;
}

}  // namespace

void validate_synthetic_spec(const SyntheticSpec& spec) {
  if (spec.clients <= 0)
    throw ParamError("synthetic: clients must be >= 1");
  if (spec.classes <= 0)
    throw ParamError("synthetic: classes must be >= 1");
  if (spec.windows_per_class <= 0 && spec.windows_per_client <= 0)
    throw ParamError("synthetic: window budget must be positive");
  if (spec.modalities.empty() || spec.modalities.size() != spec.dims.size())
    throw ParamError("synthetic: " + std::to_string(spec.modalities.size()) +
                     " modalities for " + std::to_string(spec.dims.size()) +
                     " dims");
  for (Index d : spec.dims)
    if (d <= 0) throw ParamError("synthetic: feature dims must be positive");
  if (!(spec.separation >= 0.0) || !(spec.noise >= 0.0))
    throw ParamError("synthetic: separation and noise must be >= 0");
}

std::vector<WindowSet> generate_synthetic(const SyntheticSpec& spec) {
  validate_synthetic_spec(spec);
  int total = spec.windows_per_client > 0
                  ? spec.windows_per_client
                  : spec.classes * spec.windows_per_class;

  // Class/modality means are shared across clients so the same activity
  // looks alike everywhere.
  Rng mean_rng(derive_seed(spec.seed, 0xC1A55));
  std::vector<std::vector<Vec>> means(static_cast<std::size_t>(spec.classes));
  for (int c = 0; c < spec.classes; ++c)
    for (std::size_t m = 0; m < spec.modalities.size(); ++m)
      means[static_cast<std::size_t>(c)].push_back(
          spec.separation * gaussian_vec(spec.dims[m], mean_rng));

  std::vector<WindowSet> out;
  for (int cl = 0; cl < spec.clients; ++cl) {
    Rng rng(derive_seed(spec.seed, 1000, static_cast<std::uint64_t>(cl)));
    std::vector<double> props = dirichlet(spec.classes, 0.5, rng);
    std::vector<int> counts = allocate_counts(props, total, rng);

    WindowSet ws;
    ws.client_id = "client" + std::to_string(cl);
    ws.modalities = spec.modalities;
    for (std::size_t m = 0; m < spec.modalities.size(); ++m)
      ws.features.emplace_back(total, spec.dims[m]);

    Index row = 0;
    for (int c = 0; c < spec.classes; ++c) {
      for (int w = 0; w < counts[static_cast<std::size_t>(c)]; ++w) {
        for (std::size_t m = 0; m < spec.modalities.size(); ++m)
          ws.features[m].row(row) =
              (means[static_cast<std::size_t>(c)][m] +
               spec.noise * gaussian_vec(spec.dims[m], rng))
                  .transpose();
        ws.labels.push_back(c);
        ws.recording_ids.push_back(c);
        ws.window_index.push_back(w);
        ++row;
      }
    }
    validate_window_set(ws);
    out.push_back(std::move(ws));
  }
  return out;
}

std::vector<RawRecording> generate_synthetic_raw(const SyntheticRawSpec& spec) {
  if (spec.clients <= 0 || spec.classes <= 0 || spec.repetitions <= 0)
    throw ParamError("synthetic raw: counts must be >= 1");
  if (!(spec.duration_s > 0.0))
    throw ParamError("synthetic raw: duration must be positive");

  const auto& mods = default_modalities();
  // Per (class, modality, channel) tone parameters shared by all clients.
  Rng tone_rng(derive_seed(spec.seed, 0x70735));
  std::uniform_real_distribution<double> freq(0.4, 3.0);
  std::uniform_real_distribution<double> amp(0.5, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Tone {
    double f, a, ph;
  };
  std::vector<std::vector<std::vector<Tone>>> tones(
      static_cast<std::size_t>(spec.classes));
  for (int c = 0; c < spec.classes; ++c) {
    auto& per_mod = tones[static_cast<std::size_t>(c)];
    per_mod.resize(mods.size());
    for (std::size_t m = 0; m < mods.size(); ++m) {
      per_mod[m].resize(static_cast<std::size_t>(mods[m].channels));
      for (auto& t : per_mod[m]) t = {freq(tone_rng), amp(tone_rng), phase(tone_rng)};
    }
  }

  std::vector<RawRecording> recs;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int cl = 0; cl < spec.clients; ++cl) {
    for (int c = 0; c < spec.classes; ++c) {
      for (int rep = 1; rep <= spec.repetitions; ++rep) {
        Rng rng(derive_seed(spec.seed,
                            static_cast<std::uint64_t>(cl * 1000 + c),
                            static_cast<std::uint64_t>(rep)));
        for (std::size_t m = 0; m < mods.size(); ++m) {
          const ModalityInfo& mod = mods[m];
          auto frames = static_cast<Index>(
              std::floor(spec.duration_s * mod.rate_hz + 1e-9)) + 1;
          RawRecording rec;
          rec.client_id = "subject" + std::to_string(cl + 1);
          rec.modality = mod.name;
          rec.label = c;
          rec.repetition = rep;
          rec.rate_hz = mod.rate_hz;
          rec.timestamps.resize(static_cast<std::size_t>(frames));
          rec.frames.resize(frames, mod.channels);
          for (Index i = 0; i < frames; ++i) {
            double t = static_cast<double>(i) / mod.rate_hz;
            rec.timestamps[static_cast<std::size_t>(i)] = t;
            for (Index ch = 0; ch < mod.channels; ++ch) {
              const Tone& tone =
                  tones[static_cast<std::size_t>(c)][m]
                       [static_cast<std::size_t>(ch)];
              rec.frames(i, ch) =
                  tone.a * std::sin(2.0 * std::numbers::pi * tone.f * t +
                                    tone.ph) +
                  spec.noise * normal(rng);
            }
          }
          recs.push_back(std::move(rec));
        }
      }
    }
  }
  return recs;
}

}  // namespace fedgraph::data
