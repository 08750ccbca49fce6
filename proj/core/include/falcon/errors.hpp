#pragma once

#include <stdexcept>
#include <string>

namespace falcon {

// Failure categories map one-to-one onto CLI exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed row in a delimited file. `row()` is 1-based and counts the header.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : DataError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class LifecycleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A curve that cannot be integrated over [0, 1].
class IntegrationError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace falcon
