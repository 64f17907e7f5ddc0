#pragma once

#include <stdexcept>
#include <string>

namespace gmchoice {

// Exit codes used by the command-line driver. Library code only throws; the
// mapping from exception type to exit code lives here so the CLI and the
// Python bindings agree on it.
enum class ExitCode : int {
  kSuccess = 0,
  kInvalidInput = 2,
  kNumericalFailure = 3,
  kResourceGuard = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kInvalidInput; }
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumericalFailure; }
};

// The substochastic block Diag(1 - mu) * rho has spectral radius >= 1, so the
// absorption probabilities are not well defined.
class SpectralRadiusViolation : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class SingularSystem : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// A simulated walk hit the step cap.
class NonTermination : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class ResourceGuard : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kResourceGuard; }
};

}  // namespace gmchoice
