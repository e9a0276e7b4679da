#pragma once

#include <stdexcept>
#include <string>

namespace nsync {

enum class ErrorKind {
  kInvalidArgument,  // shape mismatch, non-finite input, bad parameter
  kAssumption,       // a modelling assumption (A1/A2/B1/B2, connectivity) fails
  kNumerical,        // solver breakdown or invariant residual out of tolerance
  kConfig,           // malformed scenario file
  kRuntime,          // integration guard, divergence, I/O
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::kInvalidArgument, what) {}
};

/// Raised when an input violates one of the standing assumptions. `assumption()`
/// carries the short tag ("A1", "A2", "B1", "B2", "connectivity") so front ends
/// can name it.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(std::string assumption, const std::string& what)
      : Error(ErrorKind::kAssumption, "assumption " + assumption + " violated: " + what),
        assumption_(std::move(assumption)) {}
  const std::string& assumption() const noexcept { return assumption_; }

 private:
  std::string assumption_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class RuntimeFailure : public Error {
 public:
  explicit RuntimeFailure(const std::string& what) : Error(ErrorKind::kRuntime, what) {}
};

}  // namespace nsync
