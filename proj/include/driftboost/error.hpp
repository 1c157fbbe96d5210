#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace driftboost {

// Base of every exception thrown by the library. `kind()` is a short stable
// tag used by the CLI for machine-readable error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("schema_mismatch", what) {}
};

// Cell-level CSV failure. Rows are 1-based data rows (the header is not counted).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : Error("parse", what), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace driftboost
