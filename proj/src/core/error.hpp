#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

// Base of every error thrown by the core. The C API maps each subclass to a
// status code, so catch sites outside the library only see codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A precondition on the physical setup failed (support leaves the box,
// partition leaves points uncovered, window crosses the validity horizon...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Nonfinite values, overflow guards.
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace nlslab
