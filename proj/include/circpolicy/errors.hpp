#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace circpolicy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidAllocation : public Error {
public:
  using Error::Error;
};

class InvalidPolicy : public Error {
public:
  using Error::Error;
};

/// Circularity of an empty allocation has no meaning.
class UndefinedIndex : public Error {
public:
  using Error::Error;
};

class Infeasible : public Error {
public:
  using Error::Error;
};

class Unbounded : public Error {
public:
  using Error::Error;
};

class NumericFailure : public Error {
public:
  using Error::Error;
};

/// A brute-force routine was asked for more work than its configured bound.
class ResourceBound : public Error {
public:
  using Error::Error;
};

class PreconditionViolated : public Error {
public:
  using Error::Error;
};

/// Tax alone can never make the destination route preferred.
class NoThreshold : public Error {
public:
  using Error::Error;
};

/// Collects every violated invariant rather than stopping at the first one.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed:";
    for (const auto& s : issues) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

class CalibrationError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace circpolicy
