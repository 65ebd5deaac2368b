#pragma once

#include <stdexcept>
#include <string>

namespace rhythm {

/// Process exit codes shared by every subcommand.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  config = 2,  // bad configuration or unreadable/unwritable file
  data = 3,    // input data violates a schema or is unusable
};

/// Base of all library errors. `stage` names the pipeline stage that failed,
/// empty when raised outside a pipeline run.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::data, what) {}
};

/// Malformed input document (JSON syntax, wrong top-level type). Carries the
/// index of the offending feature or line when known, -1 otherwise.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, long index = -1)
      : DataError(what), index_(index) {}
  [[nodiscard]] long index() const noexcept { return index_; }

 private:
  long index_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class GeometryError : public DataError {
 public:
  using DataError::DataError;
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ExitCode::internal, what) {}
};

}  // namespace rhythm
