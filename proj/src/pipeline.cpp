#include "fedgraph/data/pipeline.hpp"

#include <algorithm>
#include <string>

#include "fedgraph/data/encoders.hpp"
#include "fedgraph/data/modality.hpp"
#include "fedgraph/errors.hpp"
#include "fedgraph/rng.hpp"

namespace fedgraph::data {

namespace {

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ClientWindows build_client_windows(const ClientRecordings& client,
                                   const PipelineConfig& config) {
  if (config.modalities.empty())
    throw ParamError("pipeline: no modalities configured");
  if (client.groups.empty())
    throw ParamError("pipeline: client " + client.client_id +
                     " has no recordings");

  std::size_t n_mods = config.modalities.size();
  // Raw frame blocks per modality, aligned across modalities window by
  // window.
  std::vector<std::vector<Mat>> blocks(n_mods);
  std::vector<int> labels, recording_ids, window_index;

  int next_recording = 0;
  for (const RecordingGroup& group : client.groups) {
    if (group.streams.size() != n_mods)
      throw SchemaError("pipeline: group for " + client.client_id +
                        " carries " + std::to_string(group.streams.size()) +
                        " streams, expected " + std::to_string(n_mods));
    double t_start = group.streams[0].timestamps.front();
    double t_end = group.streams[0].timestamps.back();
    for (const RawRecording& s : group.streams) {
      t_start = std::max(t_start, s.timestamps.front());
      t_end = std::min(t_end, s.timestamps.back());
    }
    if (t_end - t_start < config.window_s) continue;

    // Windows are paired across modalities by index on the shared grid
    // origin; rounding can leave stragglers in one stream, so clip to the
    // shortest stream.
    std::vector<std::vector<FrameBlock>> per_stream(n_mods);
    std::size_t n_windows = std::string::npos;
    for (std::size_t m = 0; m < n_mods; ++m) {
      const ModalityInfo& info = modality_info(config.modalities[m]);
      RawRecording uniform =
          resample_span(group.streams[m], info.rate_hz, t_start, t_end);
      uniform.label = group.label;
      per_stream[m] = segment_windows(uniform, config.window_s, config.stride_s);
      n_windows = std::min(n_windows, per_stream[m].size());
    }
    if (n_windows == 0 || n_windows == std::string::npos) continue;

    int rec_id = next_recording++;
    for (std::size_t w = 0; w < n_windows; ++w) {
      for (std::size_t m = 0; m < n_mods; ++m)
        blocks[m].push_back(std::move(per_stream[m][w].frames));
      labels.push_back(group.label);
      recording_ids.push_back(rec_id);
      window_index.push_back(static_cast<int>(w));
    }
  }

  if (labels.empty())
    throw ParamError("pipeline: client " + client.client_id +
                     " yields no windows at window " +
                     std::to_string(config.window_s) + "s");

  std::uint64_t client_seed =
      derive_seed(config.seed, hash_string(client.client_id));
  auto [train_idx, test_idx] =
      split_indices(labels, config.train_fraction, client_seed);

  ClientWindows out;
  out.windows.client_id = client.client_id;
  out.windows.modalities = config.modalities;
  out.windows.labels = labels;
  out.windows.recording_ids = recording_ids;
  out.windows.window_index = window_index;
  out.train_idx = train_idx;
  out.test_idx = test_idx;

  for (std::size_t m = 0; m < n_mods; ++m) {
    const ModalityInfo& info = modality_info(config.modalities[m]);

    // Standardize with training-window statistics.
    Index frames_per_window = blocks[m][0].rows();
    Mat train_frames(static_cast<Index>(train_idx.size()) * frames_per_window,
                     blocks[m][0].cols());
    for (std::size_t i = 0; i < train_idx.size(); ++i)
      train_frames.middleRows(static_cast<Index>(i) * frames_per_window,
                              frames_per_window) =
          blocks[m][static_cast<std::size_t>(train_idx[i])];
    ZScoreStats stats = compute_zscore(train_frames);
    for (Mat& b : blocks[m]) b = apply_zscore(b, stats);

    Index n = static_cast<Index>(labels.size());
    Mat feats;
    if (!info.image) {
      feats.resize(n, static_cast<Index>(blocks[m][0].cols()) * config.dct_keep);
      for (Index i = 0; i < n; ++i)
        feats.row(i) =
            encode_accel(blocks[m][static_cast<std::size_t>(i)], config.dct_keep)
                .transpose();
    } else {
      Mat pooled(n, blocks[m][0].cols());
      for (Index i = 0; i < n; ++i)
        pooled.row(i) = blocks[m][static_cast<std::size_t>(i)].colwise().mean();
      Mat train_pooled(static_cast<Index>(train_idx.size()), pooled.cols());
      for (std::size_t i = 0; i < train_idx.size(); ++i)
        train_pooled.row(static_cast<Index>(i)) = pooled.row(train_idx[i]);
      AutoencoderResult ae = train_autoencoder(
          train_pooled, config.ae_hidden, config.ae_latent, config.ae_epochs,
          config.ae_lr, derive_seed(client_seed, hash_string(info.name)));
      feats = encode(ae.encoder, pooled);
    }
    out.windows.features.push_back(std::move(feats));
  }

  validate_window_set(out.windows);
  return out;
}

}  // namespace fedgraph::data
