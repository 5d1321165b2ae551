#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sekira {

// Caller passed arguments that violate a documented precondition
// (bad shapes, out-of-range rates, empty inputs where forbidden).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data: corpora, embedding files, token streams.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  // 1-based line number, or 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Problems with a persisted model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptCheckpoint : public ModelError {
 public:
  using ModelError::ModelError;
};

class VersionMismatch : public ModelError {
 public:
  using ModelError::ModelError;
};

class ShapeMismatch : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace sekira
