#pragma once

#include <stdexcept>
#include <string>

namespace mna {

/// Base for every failure caused by bad input data (as opposed to bad
/// parameters, which raise std::invalid_argument).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A merger-event log that cannot form a valid acquisition forest.
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

/// Malformed file content. `line` is 1-based, 0 when not tied to a line.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line) : DataError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mna
