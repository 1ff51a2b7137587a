#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stochalign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A transition was fired or queried at a marking that does not enable it.
class NotEnabledError : public Error {
 public:
  using Error::Error;
};

/// A transition sequence does not replay in the net, or does not end in a deadlock.
class InvalidPathError : public Error {
 public:
  using Error::Error;
};

/// A net violates a structural invariant (dangling index, non-positive weight, ...).
class InvalidNetError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class MalformedProblemError : public Error {
 public:
  using Error::Error;
};

/// Parse failure carrying the 1-based line number of the offending input line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stochalign
