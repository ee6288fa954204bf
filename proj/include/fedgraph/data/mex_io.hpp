#pragma once

#include <string>
#include <vector>

#include "fedgraph/data/recording.hpp"

namespace fedgraph::data {

// All streams of one (subject, exercise, repetition) capture, ordered like
// the modality list they were loaded with.
struct RecordingGroup {
  std::string client_id;
  int label = 0;
  int repetition = 0;
  std::vector<RawRecording> streams;
};

struct ClientRecordings {
  std::string client_id;
  std::vector<RecordingGroup> groups;
};

// Loads a dataset laid out as <root>/<modality>/<subject>/<exercise>_<rep>.csv
// where each CSV row is timestamp,v1,...,vK (timestamp in seconds). The
// exercise id is 1-based in filenames and becomes the 0-based label.
// Missing modality directories and wrong channel counts are schema errors;
// groups missing one of the requested streams are skipped with a warning on
// stderr.
std::vector<ClientRecordings> load_mex_layout(
    const std::string& root, const std::vector<std::string>& modalities);

// Writes recordings in the same layout (used by the dataset generator).
void write_mex_layout(const std::string& root,
                      const std::vector<RawRecording>& recordings);

}  // namespace fedgraph::data
