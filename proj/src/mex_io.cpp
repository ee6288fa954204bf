#include "fedgraph/data/mex_io.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <tuple>

#include "fedgraph/csv.hpp"
#include "fedgraph/data/modality.hpp"
#include "fedgraph/errors.hpp"

namespace fs = std::filesystem;

namespace fedgraph::data {

namespace {

// Parses "<exercise>_<repetition>.csv"; returns nothing for other names.
std::optional<std::pair<int, int>> parse_recording_name(
    const std::string& name) {
  if (name.size() < 4 || name.substr(name.size() - 4) != ".csv")
    return std::nullopt;
  std::string stem = name.substr(0, name.size() - 4);
  auto sep = stem.find('_');
  if (sep == std::string::npos) return std::nullopt;
  try {
    std::size_t pos = 0;
    int ex = std::stoi(stem.substr(0, sep), &pos);
    if (pos != sep) return std::nullopt;
    int rep = std::stoi(stem.substr(sep + 1), &pos);
    if (pos != stem.size() - sep - 1) return std::nullopt;
    if (ex < 1 || rep < 0) return std::nullopt;
    return std::make_pair(ex, rep);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

RawRecording load_recording_csv(const fs::path& path,
                                const ModalityInfo& info,
                                const std::string& subject, int exercise,
                                int repetition) {
  auto rows = read_csv_rows(path.string());
  std::size_t first = 0;
  if (!rows.empty()) {
    // Tolerate an optional header row.
    try {
      parse_double_field(rows[0][0], path.string(), 1);
    } catch (const ParseError&) {
      first = 1;
    }
  }
  std::size_t n = rows.size() - first;
  if (n == 0) throw ParseError(path.string() + ": no data rows");

  RawRecording rec;
  rec.client_id = subject;
  rec.modality = info.name;
  rec.label = exercise - 1;
  rec.repetition = repetition;
  rec.rate_hz = info.rate_hz;
  rec.timestamps.resize(n);
  rec.frames.resize(static_cast<Index>(n), info.channels);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& fields = rows[r + first];
    std::size_t line = r + first + 1;
    if (static_cast<Index>(fields.size()) != info.channels + 1)
      throw SchemaError(path.string() + ":" + std::to_string(line) + ": " +
                        std::to_string(fields.size() - 1) + " channels, " +
                        info.name + " expects " +
                        std::to_string(info.channels));
    rec.timestamps[r] = parse_double_field(fields[0], path.string(), line);
    for (Index c = 0; c < info.channels; ++c)
      rec.frames(static_cast<Index>(r), c) = parse_double_field(
          fields[static_cast<std::size_t>(c) + 1], path.string(), line);
  }
  validate_recording(rec);
  return rec;
}

}  // namespace

std::vector<ClientRecordings> load_mex_layout(
    const std::string& root, const std::vector<std::string>& modalities) {
  if (modalities.empty())
    throw ParamError("load_mex_layout: no modalities requested");
  fs::path base(root);
  if (!fs::is_directory(base))
    throw IoError("dataset root is not a directory: " + root);

  // (subject, exercise, repetition) -> streams indexed like `modalities`.
  std::map<std::tuple<std::string, int, int>,
           std::vector<std::optional<RawRecording>>>
      groups;

  for (std::size_t m = 0; m < modalities.size(); ++m) {
    const ModalityInfo& info = modality_info(modalities[m]);
    fs::path mod_dir = base / info.name;
    if (!fs::is_directory(mod_dir))
      throw SchemaError("missing modality directory: " + mod_dir.string());
    for (const auto& subject_entry : fs::directory_iterator(mod_dir)) {
      if (!subject_entry.is_directory()) continue;
      std::string subject = subject_entry.path().filename().string();
      for (const auto& file_entry :
           fs::directory_iterator(subject_entry.path())) {
        if (!file_entry.is_regular_file()) continue;
        auto parsed = parse_recording_name(file_entry.path().filename().string());
        if (!parsed) continue;
        auto [exercise, repetition] = *parsed;
        auto key = std::make_tuple(subject, exercise, repetition);
        auto& streams = groups[key];
        streams.resize(modalities.size());
        streams[m] = load_recording_csv(file_entry.path(), info, subject,
                                        exercise, repetition);
      }
    }
  }

  std::map<std::string, ClientRecordings> by_client;
  for (auto& [key, streams] : groups) {
    const auto& [subject, exercise, repetition] = key;
    bool complete = true;
    for (std::size_t m = 0; m < modalities.size(); ++m)
      if (!streams[m].has_value()) {
        std::cerr << "warning: skipping " << subject << " exercise "
                  << exercise << " repetition " << repetition
                  << ": missing " << modalities[m] << " stream\n";
        complete = false;
      }
    if (!complete) continue;
    RecordingGroup g;
    g.client_id = subject;
    g.label = exercise - 1;
    g.repetition = repetition;
    for (auto& s : streams) g.streams.push_back(std::move(*s));
    auto& client = by_client[subject];
    client.client_id = subject;
    client.groups.push_back(std::move(g));
  }

  std::vector<ClientRecordings> out;
  for (auto& [subject, client] : by_client) {
    std::sort(client.groups.begin(), client.groups.end(),
              [](const RecordingGroup& a, const RecordingGroup& b) {
                return std::tie(a.label, a.repetition) <
                       std::tie(b.label, b.repetition);
              });
    out.push_back(std::move(client));
  }
  if (out.empty()) throw SchemaError("no complete recordings under " + root);
  return out;
}

void write_mex_layout(const std::string& root,
                      const std::vector<RawRecording>& recordings) {
  for (const RawRecording& rec : recordings) {
    validate_recording(rec);
    fs::path dir = fs::path(root) / rec.modality / rec.client_id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    fs::path file =
        dir / (std::to_string(rec.label + 1) + "_" +
               std::to_string(rec.repetition) + ".csv");
    CsvWriter w(file.string());
    std::vector<std::string> fields;
    for (Index i = 0; i < rec.frames.rows(); ++i) {
      fields.clear();
      fields.push_back(format_double(rec.timestamps[static_cast<std::size_t>(i)]));
      for (Index c = 0; c < rec.frames.cols(); ++c)
        fields.push_back(format_double(rec.frames(i, c)));
      w.raw_row(fields);
    }
  }
}

}  // namespace fedgraph::data
