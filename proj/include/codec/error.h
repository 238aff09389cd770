#pragma once

#include <stdexcept>
#include <string>

namespace codec {

// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  kUsage,    // bad arguments or preconditions
  kData,     // malformed input files, parse errors, format mismatches
  kNumeric,  // non-finite values, non-integrable forms
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

class DimensionMismatch : public UsageError {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : UsageError("dimension mismatch: expected " + std::to_string(expected) +
                   ", got " + std::to_string(actual)) {}
};

// A quadratic form whose exponent does not go to -inf in some dimension.
class NonIntegrableError : public NumericError {
 public:
  explicit NonIntegrableError(const std::string& what) : NumericError(what) {}
};

// Syntax errors carry 1-based line/column of the offending token.
class ParseError : public DataError {
 public:
  ParseError(const std::string& message, int line, int column)
      : DataError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace codec
