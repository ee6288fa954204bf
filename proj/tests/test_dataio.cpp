#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "fedgraph/data/encoders.hpp"
#include "fedgraph/data/mex_io.hpp"
#include "fedgraph/data/pipeline.hpp"
#include "fedgraph/data/recording.hpp"
#include "fedgraph/data/synthetic.hpp"
#include "fedgraph/data/windows.hpp"
#include "fedgraph/numerics/dct.hpp"
#include "test_support.hpp"

using namespace fedgraph;
using namespace fedgraph::data;

namespace {

RawRecording make_recording(double duration_s, double rate_hz, Index channels,
                            int label = 0) {
  RawRecording rec;
  rec.client_id = "01";
  rec.modality = "act";
  rec.label = label;
  rec.rate_hz = rate_hz;
  Index n = static_cast<Index>(std::llround(duration_s * rate_hz)) + 1;
  rec.frames.resize(n, channels);
  rec.timestamps.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / rate_hz;
    rec.timestamps[static_cast<std::size_t>(i)] = t;
    for (Index c = 0; c < channels; ++c)
      rec.frames(i, c) = t + static_cast<double>(c);
  }
  return rec;
}

std::filesystem::path fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("fedgraph_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("resample preserves constants and linear ramps") {
  RawRecording rec = make_recording(2.0, 50.0, 2);
  RawRecording up = resample(rec, 100.0);
  CHECK(up.rate_hz == 100.0);
  CHECK(up.frame_count() == 201);
  for (Index i = 0; i < up.frame_count(); ++i) {
    double t = static_cast<double>(i) / 100.0;
    CHECK(std::abs(up.frames(i, 0) - t) < 1e-12);       // ramp channel
    CHECK(std::abs(up.frames(i, 1) - (t + 1)) < 1e-12);  // shifted ramp
  }
}

TEST_CASE("resample_span clamps outside the recorded span") {
  RawRecording rec = make_recording(1.0, 10.0, 1);
  RawRecording out = resample_span(rec, 10.0, -0.5, 1.5);
  CHECK(out.frame_count() == 21);
  CHECK(out.frames(0, 0) == rec.frames(0, 0));
  CHECK(out.frames(20, 0) == rec.frames(rec.frame_count() - 1, 0));
}

TEST_CASE("resample of a single-frame recording replicates the frame") {
  RawRecording rec;
  rec.rate_hz = 10.0;
  rec.timestamps = {0.0};
  rec.frames = Mat::Constant(1, 3, 2.5);
  RawRecording out = resample_span(rec, 10.0, 0.0, 0.5);
  CHECK(out.frame_count() == 6);
  CHECK((out.frames.array() == 2.5).all());
}

TEST_CASE("validate_recording rejects malformed inputs") {
  RawRecording rec = make_recording(1.0, 10.0, 2);
  rec.frames.resize(0, 2);
  rec.timestamps.clear();
  CHECK_THROWS_AS(validate_recording(rec), ParamError);

  rec = make_recording(1.0, 10.0, 2);
  rec.timestamps[3] = rec.timestamps[2];  // not strictly increasing
  CHECK_THROWS_AS(validate_recording(rec), ParamError);

  rec = make_recording(1.0, 10.0, 2);
  rec.timestamps.pop_back();
  CHECK_THROWS_AS(validate_recording(rec), ShapeError);
}

TEST_CASE("zscore statistics standardize and keep constant channels finite") {
  Mat frames(4, 2);
  frames << 1, 5, 2, 5, 3, 5, 4, 5;
  ZScoreStats stats = compute_zscore(frames);
  CHECK(std::abs(stats.mean(0) - 2.5) < 1e-12);
  CHECK(std::abs(stats.std(0) - std::sqrt(1.25)) < 1e-12);
  CHECK(stats.std(1) == 1.0);  // zero-variance channel

  Mat z = apply_zscore(frames, stats);
  CHECK(std::abs(z.col(0).mean()) < 1e-12);
  CHECK((z.col(1).array() == 0.0).all());
}

TEST_CASE("segmentation yields the expected window count and shape") {
  RawRecording rec = make_recording(20.0, 100.0, 3, 4);
  std::vector<FrameBlock> blocks = segment_windows(rec, 5.0, 2.0);
  REQUIRE(blocks.size() == 8);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(blocks[i].frames.rows() == 500);
    CHECK(blocks[i].frames.cols() == 3);
    CHECK(blocks[i].label == 4);
    CHECK(blocks[i].window_index == static_cast<int>(i));
  }
  // Consecutive windows start 200 frames apart.
  CHECK(blocks[1].frames(0, 0) == rec.frames(200, 0));
}

TEST_CASE("segmentation rejects bad strides and tolerates short recordings") {
  RawRecording rec = make_recording(3.0, 100.0, 1);
  CHECK_THROWS_AS(segment_windows(rec, 2.0, 3.0), ParamError);
  CHECK_THROWS_AS(segment_windows(rec, 2.0, 0.0), ParamError);
  CHECK(segment_windows(rec, 5.0, 2.0).empty());
}

TEST_CASE("accelerometer encoding concatenates per-axis dct coefficients") {
  Rng rng(3);
  Mat block = ts::random_matrix(rng, 500, 3);
  Vec code = encode_accel(block, 60);
  REQUIRE(code.size() == 180);
  for (Index axis = 0; axis < 3; ++axis) {
    Vec axis_coeffs = num::dct_1d(block.col(axis), 60);
    CHECK((code.segment(axis * 60, 60) - axis_coeffs).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("autoencoder learns a rank-one dataset") {
  Rng rng(5);
  Vec direction = ts::random_matrix(rng, 12, 1);
  Mat inputs(40, 12);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (Index i = 0; i < 40; ++i) inputs.row(i) = unif(rng) * direction.transpose();

  AutoencoderResult result = train_autoencoder(inputs, 16, 2, 150, 0.01, 11);
  double variance = (inputs.array() - inputs.mean()).square().mean();
  CHECK(result.final_mse < result.initial_mse);
  CHECK(result.final_mse < 0.01 * variance);

  AutoencoderResult again = train_autoencoder(inputs, 16, 2, 150, 0.01, 11);
  CHECK((result.encoder.w1 - again.encoder.w1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((result.encoder.w2 - again.encoder.w2).cwiseAbs().maxCoeff() == 0.0);

  Mat latent = encode(result.encoder, inputs);
  CHECK(latent.rows() == 40);
  CHECK(latent.cols() == 2);
}

TEST_CASE("image encoding mean-pools frames before the encoder") {
  Rng rng(9);
  Mat block = ts::random_matrix(rng, 30, 6);
  AutoencoderResult ae = train_autoencoder(block, 8, 3, 5, 0.01, 2);
  Vec code = encode_image_modality(block, ae.encoder);
  REQUIRE(code.size() == 3);
  Mat pooled = block.colwise().mean();
  Mat direct = encode(ae.encoder, pooled);
  CHECK((code.transpose() - direct.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stratified split is deterministic, disjoint, and balanced") {
  std::vector<int> labels;
  for (int cls = 0; cls < 3; ++cls)
    for (int i = 0; i < 10; ++i) labels.push_back(cls);

  auto [train, test] = split_indices(labels, 0.7, 99);
  CHECK(train.size() == 21);
  CHECK(test.size() == 9);

  std::set<Index> seen(train.begin(), train.end());
  seen.insert(test.begin(), test.end());
  CHECK(seen.size() == labels.size());

  for (int cls = 0; cls < 3; ++cls) {
    auto count = [&](const std::vector<Index>& idx) {
      return std::count_if(idx.begin(), idx.end(), [&](Index i) {
        return labels[static_cast<std::size_t>(i)] == cls;
      });
    };
    CHECK(count(train) == 7);
    CHECK(count(test) == 3);
  }

  auto [train2, test2] = split_indices(labels, 0.7, 99);
  CHECK(train == train2);
  CHECK(test == test2);
  auto [train3, test3] = split_indices(labels, 0.7, 100);
  CHECK(train != train3);
  (void)test3;
}

TEST_CASE("split keeps tiny classes usable") {
  // A single-window class trains; a two-window class splits one and one.
  auto [train, test] = split_indices({0, 1, 1}, 0.9, 1);
  CHECK(train.size() == 2);
  CHECK(test.size() == 1);
  CHECK(std::find(train.begin(), train.end(), 0) != train.end());
}

TEST_CASE("synthetic windows have the requested shape and are deterministic") {
  SyntheticSpec spec;
  spec.clients = 4;
  spec.classes = 3;
  spec.windows_per_client = 40;
  spec.dims = {16, 16, 8, 8};
  spec.seed = 7;

  std::vector<WindowSet> clients = generate_synthetic(spec);
  REQUIRE(clients.size() == 4);
  for (const WindowSet& ws : clients) {
    validate_window_set(ws);
    CHECK(ws.size() == 40);
    REQUIRE(ws.features.size() == 4);
    CHECK(ws.features[0].cols() == 16);
    CHECK(ws.features[2].cols() == 8);
    std::vector<long> per_class(3, 0);
    for (int y : ws.labels) {
      REQUIRE(y >= 0);
      REQUIRE(y < 3);
      per_class[static_cast<std::size_t>(y)] += 1;
    }
    for (long n : per_class) CHECK(n >= 2);  // every class present
  }

  std::vector<WindowSet> again = generate_synthetic(spec);
  for (std::size_t c = 0; c < clients.size(); ++c) {
    CHECK(clients[c].labels == again[c].labels);
    for (std::size_t m = 0; m < 4; ++m)
      CHECK((clients[c].features[m] - again[c].features[m])
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }
}

TEST_CASE("synthetic class means are shared across clients") {
  SyntheticSpec spec;
  spec.clients = 3;
  spec.classes = 2;
  spec.windows_per_class = 5;
  spec.dims = {6, 6, 4, 4};
  spec.noise = 0.0;  // windows collapse onto the class means
  spec.seed = 21;

  std::vector<WindowSet> clients = generate_synthetic(spec);
  auto row_for_class = [](const WindowSet& ws, int cls) {
    for (Index i = 0; i < ws.size(); ++i)
      if (ws.labels[static_cast<std::size_t>(i)] == cls) return i;
    return Index(-1);
  };
  for (int cls = 0; cls < 2; ++cls) {
    Index a = row_for_class(clients[0], cls);
    Index b = row_for_class(clients[2], cls);
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    for (std::size_t m = 0; m < 4; ++m)
      CHECK((clients[0].features[m].row(a) - clients[2].features[m].row(b))
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }
}

TEST_CASE("window set splicing keeps recording ids distinct") {
  SyntheticSpec spec;
  spec.clients = 2;
  spec.classes = 2;
  spec.windows_per_class = 3;
  spec.dims = {4, 4, 4, 4};
  std::vector<WindowSet> clients = generate_synthetic(spec);
  int base_max = *std::max_element(clients[0].recording_ids.begin(),
                                   clients[0].recording_ids.end());
  append_windows(clients[0], clients[1]);
  CHECK(clients[0].size() == 12);
  int extra_min = *std::min_element(clients[0].recording_ids.begin() + 6,
                                    clients[0].recording_ids.end());
  CHECK(extra_min > base_max);
  validate_window_set(clients[0]);
}

TEST_CASE("raw sensor layout round-trips through disk exactly") {
  SyntheticRawSpec spec;
  spec.clients = 2;
  spec.classes = 2;
  spec.duration_s = 6.0;
  spec.seed = 13;
  std::vector<RawRecording> raws = generate_synthetic_raw(spec);
  REQUIRE(raws.size() == 16);  // 2 clients x 2 exercises x 4 modalities

  auto root = fresh_dir("roundtrip");
  write_mex_layout(root.string(), raws);
  std::vector<ClientRecordings> loaded =
      load_mex_layout(root.string(), {"act", "acw", "dc", "pm"});
  REQUIRE(loaded.size() == 2);
  REQUIRE(loaded[0].groups.size() == 2);
  const RecordingGroup& group = loaded[0].groups[0];
  REQUIRE(group.streams.size() == 4);

  for (const RawRecording& rec : group.streams) {
    auto match = std::find_if(raws.begin(), raws.end(), [&](const auto& r) {
      return r.client_id == group.client_id && r.modality == rec.modality &&
             r.label == group.label && r.repetition == group.repetition;
    });
    REQUIRE(match != raws.end());
    CHECK(rec.frames.rows() == match->frames.rows());
    CHECK((rec.frames - match->frames).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rec.timestamps == match->timestamps);
  }
  std::filesystem::remove_all(root);
}

TEST_CASE("loading fails loudly on missing directories and bad rows") {
  auto root = fresh_dir("badlayout");
  CHECK_THROWS_AS(load_mex_layout(root.string(), {"act"}), SchemaError);

  std::filesystem::create_directories(root / "act" / "01");
  {
    std::ofstream out(root / "act" / "01" / "1_1.csv");
    out << "0.0,1.0,2.0,3.0\n0.01,1.0,2.0\n";  // channel count changes
  }
  CHECK_THROWS_AS(load_mex_layout(root.string(), {"act"}), SchemaError);
  std::filesystem::remove_all(root);
}

TEST_CASE("incomplete recording groups are skipped, not fatal") {
  SyntheticRawSpec spec;
  spec.clients = 1;
  spec.classes = 2;
  spec.duration_s = 6.0;
  std::vector<RawRecording> raws = generate_synthetic_raw(spec);
  auto root = fresh_dir("incomplete");
  write_mex_layout(root.string(), raws);
  // Drop one stream of exercise 2.
  REQUIRE(std::filesystem::remove(root / "pm" / "subject1" / "2_1.csv"));
  std::vector<ClientRecordings> loaded =
      load_mex_layout(root.string(), {"act", "acw", "dc", "pm"});
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].groups.size() == 1);
  CHECK(loaded[0].groups[0].label == 0);
  std::filesystem::remove_all(root);
}

TEST_CASE("the window pipeline encodes every modality at its own width") {
  SyntheticRawSpec spec;
  spec.clients = 1;
  spec.classes = 2;
  spec.duration_s = 12.0;
  spec.seed = 17;
  std::vector<RawRecording> raws = generate_synthetic_raw(spec);
  auto root = fresh_dir("pipeline");
  write_mex_layout(root.string(), raws);
  std::vector<ClientRecordings> loaded =
      load_mex_layout(root.string(), {"act", "acw", "dc", "pm"});

  PipelineConfig config;
  config.dct_keep = 10;
  config.ae_hidden = 8;
  config.ae_latent = 3;
  config.ae_epochs = 20;
  config.seed = 23;
  ClientWindows cw = build_client_windows(loaded[0], config);
  validate_window_set(cw.windows);

  // 12 s at 5 s / 2 s windowing gives 4 windows per exercise.
  CHECK(cw.windows.size() == 8);
  REQUIRE(cw.windows.features.size() == 4);
  CHECK(cw.windows.features[0].cols() == 30);  // 3 axes x 10 coefficients
  CHECK(cw.windows.features[1].cols() == 30);
  CHECK(cw.windows.features[2].cols() == 3);
  CHECK(cw.windows.features[3].cols() == 3);

  CHECK(cw.train_idx.size() + cw.test_idx.size() ==
        static_cast<std::size_t>(cw.windows.size()));
  CHECK(!cw.train_idx.empty());
  CHECK(!cw.test_idx.empty());

  ClientWindows again = build_client_windows(loaded[0], config);
  CHECK(again.train_idx == cw.train_idx);
  for (std::size_t m = 0; m < 4; ++m)
    CHECK((again.windows.features[m] - cw.windows.features[m])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  std::filesystem::remove_all(root);
}
