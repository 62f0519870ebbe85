#pragma once

#include <stdexcept>
#include <string>

namespace mksvm {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external input (CSV, space files, databases). Carries the
/// 1-based line and, where known, the 0-based column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, long column = -1)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  std::size_t line_;
  long column_;
};

/// Database consistency violations: space mismatch, sequence regression.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The request is well formed but the operation declines it
/// (oversize grid, nothing left to refine).
class Refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mksvm
