#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sftrack {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when one applies
/// (0 means "whole input").
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(format(source, line, what)), source_(std::move(source)), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line, const std::string& what) {
    std::string msg = source.empty() ? std::string("<input>") : source;
    if (line > 0) msg += ":" + std::to_string(line);
    return msg + ": " + what;
  }

  std::string source_;
  std::size_t line_ = 0;
};

/// Input that parses but is not acceptable (wrong format variant, bad value).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown, e.g. a singular innovation covariance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sftrack
