#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rieif {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or violated precondition (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Array shapes do not agree for a primitive.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Filesystem failure (CLI exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss (CLI exit code 3).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace rieif
