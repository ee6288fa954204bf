#include "fedgraph/data/recording.hpp"

#include <cmath>
#include <string>

#include "fedgraph/errors.hpp"

namespace fedgraph::data {

void validate_recording(const RawRecording& rec) {
  if (rec.frames.rows() == 0)
    throw ParamError("recording " + rec.client_id + "/" + rec.modality +
                     ": no frames");
  if (static_cast<Index>(rec.timestamps.size()) != rec.frames.rows())
    throw ShapeError("recording " + rec.client_id + "/" + rec.modality + ": " +
                     std::to_string(rec.timestamps.size()) +
                     " timestamps for " + std::to_string(rec.frames.rows()) +
                     " frames");
  for (std::size_t i = 1; i < rec.timestamps.size(); ++i)
    if (!(rec.timestamps[i] > rec.timestamps[i - 1]))
      throw ParamError("recording " + rec.client_id + "/" + rec.modality +
                       ": timestamps not strictly increasing at row " +
                       std::to_string(i));
}

RawRecording resample(const RawRecording& rec, double target_hz) {
  validate_recording(rec);
  return resample_span(rec, target_hz, rec.timestamps.front(),
                       rec.timestamps.back());
}

RawRecording resample_span(const RawRecording& rec, double target_hz,
                           double t_start, double t_end) {
  validate_recording(rec);
  if (!(target_hz > 0.0))
    throw ParamError("resample: rate " + std::to_string(target_hz) +
                     " must be positive");
  if (!(t_end >= t_start))
    throw ParamError("resample: span end before start");
  Index n_out =
      static_cast<Index>(std::floor((t_end - t_start) * target_hz + 1e-9)) + 1;

  RawRecording out = rec;
  out.rate_hz = target_hz;
  out.timestamps.resize(static_cast<std::size_t>(n_out));
  out.frames.resize(n_out, rec.frames.cols());

  if (rec.frames.rows() == 1) {
    for (Index i = 0; i < n_out; ++i) {
      out.timestamps[static_cast<std::size_t>(i)] =
          t_start + static_cast<double>(i) / target_hz;
      out.frames.row(i) = rec.frames.row(0);
    }
    return out;
  }

  std::size_t hi = 1;
  for (Index i = 0; i < n_out; ++i) {
    double t = t_start + static_cast<double>(i) / target_hz;
    out.timestamps[static_cast<std::size_t>(i)] = t;
    while (hi + 1 < rec.timestamps.size() && rec.timestamps[hi] < t) ++hi;
    std::size_t lo = hi - 1;
    double tl = rec.timestamps[lo], th = rec.timestamps[hi];
    double w = t <= tl ? 0.0 : t >= th ? 1.0 : (t - tl) / (th - tl);
    out.frames.row(i) =
        (1.0 - w) * rec.frames.row(static_cast<Index>(lo)) +
        w * rec.frames.row(static_cast<Index>(hi));
  }
  return out;
}

ZScoreStats compute_zscore(const Mat& frames) {
  if (frames.rows() == 0) throw ParamError("compute_zscore: no frames");
  ZScoreStats s;
  s.mean = frames.colwise().mean();
  RowVec var = (frames.rowwise() - s.mean).array().square().colwise().mean();
  s.std = var.array().sqrt();
  for (Index j = 0; j < s.std.cols(); ++j)
    if (s.std(j) == 0.0) s.std(j) = 1.0;
  return s;
}

Mat apply_zscore(const Mat& frames, const ZScoreStats& stats) {
  if (frames.cols() != stats.mean.cols())
    throw ShapeError("apply_zscore: " + std::to_string(frames.cols()) +
                     " channels but stats for " +
                     std::to_string(stats.mean.cols()));
  return (frames.rowwise() - stats.mean).array().rowwise() /
         stats.std.array();
}

std::vector<FrameBlock> segment_windows(const RawRecording& rec,
                                        double window_s, double stride_s) {
  validate_recording(rec);
  if (!(rec.rate_hz > 0.0))
    throw ParamError("segment_windows: recording has no sample rate");
  if (!(stride_s > 0.0) || stride_s > window_s)
    throw ParamError("segment_windows: stride " + std::to_string(stride_s) +
                     " must be in (0, window=" + std::to_string(window_s) +
                     "]");
  Index w = static_cast<Index>(std::llround(window_s * rec.rate_hz));
  Index s = static_cast<Index>(std::llround(stride_s * rec.rate_hz));
  if (w <= 0 || s <= 0)
    throw ParamError("segment_windows: window or stride below one frame");

  std::vector<FrameBlock> blocks;
  int idx = 0;
  for (Index start = 0; start + w <= rec.frames.rows(); start += s) {
    FrameBlock b;
    b.frames = rec.frames.middleRows(start, w);
    b.label = rec.label;
    b.window_index = idx++;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace fedgraph::data
