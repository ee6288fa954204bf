#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fedgraph/errors.hpp"

namespace fedgraph {

// Doubles are written with 17 significant digits so a read-back reproduces
// the exact bit pattern.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_field(double v) { return format_double(v); }
inline std::string csv_field(int v) { return std::to_string(v); }
inline std::string csv_field(long v) { return std::to_string(v); }
inline std::string csv_field(long long v) { return std::to_string(v); }
inline std::string csv_field(std::uint64_t v) { return std::to_string(v); }
inline std::string csv_field(const std::string& v) { return v; }
inline std::string csv_field(const char* v) { return v; }

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open for writing: " + path);
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::string line;
    bool first = true;
    (
        [&] {
          if (!first) line += ',';
          first = false;
          line += csv_field(fields);
        }(),
        ...);
    out_ << line << '\n';
    if (!out_) throw IoError("write failed: " + path_);
  }

  void raw_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

// Reads every row of a CSV file, including the header if present.
inline std::vector<std::vector<std::string>> read_csv_rows(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

inline double parse_double_field(const std::string& text,
                                 const std::string& file, std::size_t line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t'))
      ++pos;
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << file << ":" << line << ": not a number: '" << text << "'";
    throw ParseError(msg.str());
  }
}

}  // namespace fedgraph
