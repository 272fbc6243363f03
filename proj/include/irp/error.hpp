#pragma once

#include <stdexcept>
#include <string>

namespace irp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV rows, JSON documents).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input parsed fine but violates a domain invariant (weights, dimensions,
// response domain of a loss).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Solver could not produce a trustworthy answer (non-convergence,
// truncated path, oracle mismatch).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad command-line usage: conflicting or missing options.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace irp
