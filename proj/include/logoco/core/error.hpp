#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace logoco {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or invalid argument value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input at a known (1-based) line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DetectorError : public Error {
 public:
  using Error::Error;
};

/// Transport failure talking to an external detector. Retryable.
class TransportError : public DetectorError {
 public:
  TransportError(const std::string& what, int attempts)
      : DetectorError(what + " (after " + std::to_string(attempts) + " attempt" +
                      (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

}  // namespace logoco
