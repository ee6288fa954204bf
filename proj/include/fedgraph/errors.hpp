#pragma once

#include <stdexcept>
#include <string>

namespace fedgraph {

// Base class for every error raised by the library. Catching this is enough
// to map any failure to a nonzero exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor dimensions incompatible with the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A scalar argument outside its documented domain.
class ParamError : public Error {
 public:
  using Error::Error;
};

// Row/column/label index outside the valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong order (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed text input (CSV rows, config lines); message carries file and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates the expected schema (missing
// modality directory, wrong channel count, unknown config key).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent experiment configuration; message names the key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (unreadable path, unwritable output directory).
class IoError : public Error {
 public:
  using Error::Error;
};

// Privacy accounting misuse (zero noise, exhausted budget) or an
// unattainable calibration target.
class AccountingError : public Error {
 public:
  using Error::Error;
};

// A metric whose value is mathematically undefined for the given inputs.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedgraph
