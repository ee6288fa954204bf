#pragma once

#include <string>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::data {

// One continuous sensor capture: frames sampled at the stored timestamps,
// one row per sample, one column per channel. Timestamps are seconds and
// must be strictly increasing.
struct RawRecording {
  std::string client_id;
  std::string modality;
  int label = 0;
  int repetition = 0;
  double rate_hz = 0.0;
  std::vector<double> timestamps;
  Mat frames;

  Index frame_count() const { return frames.rows(); }
  Index channels() const { return frames.cols(); }
};

// Validates the invariants above; throws on violation.
void validate_recording(const RawRecording& rec);

// Linear interpolation onto a uniform grid starting at the first timestamp.
// The output covers the original time span at target_hz.
RawRecording resample(const RawRecording& rec, double target_hz);

// Same, but on the grid t_start + i / target_hz for t_start + i / target_hz
// <= t_end. Queries outside the recorded span clamp to the edge frames.
RawRecording resample_span(const RawRecording& rec, double target_hz,
                           double t_start, double t_end);

// Per-channel standardization statistics.
struct ZScoreStats {
  RowVec mean;
  RowVec std;
};

// Statistics over the rows of `frames`; channels with zero variance get a
// unit std so that applying the stats maps them to zero.
ZScoreStats compute_zscore(const Mat& frames);

Mat apply_zscore(const Mat& frames, const ZScoreStats& stats);

// A fixed-length run of frames cut from one recording.
struct FrameBlock {
  Mat frames;
  int label = 0;
  int window_index = 0;
};

// Slices a recording into windows of window_s seconds every stride_s
// seconds. Recordings shorter than one window yield an empty list.
std::vector<FrameBlock> segment_windows(const RawRecording& rec,
                                        double window_s, double stride_s);

}  // namespace fedgraph::data
