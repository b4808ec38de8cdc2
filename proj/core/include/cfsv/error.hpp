#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfsv {

enum class ErrorCode {
  // input / validation
  NonPositiveSigma,
  CorrelationOutOfRange,
  CorrelationMatrixNotPSD,
  NegativeRate,
  NonFiniteParameter,
  DomainError,
  InvalidCurve,
  InvalidConfig,
  MissingSettlement,
  NoArbitrageViolation,
  // numerical
  NonConvergence,
  QuadratureTailError,
  DegenerateDenominator,
  DegenerateParameters,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base of every exception thrown by the library. Carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Bad inputs: the caller can fix these (CLI exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

/// The numerics failed on otherwise valid inputs (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

bool is_input_error(ErrorCode code) noexcept;

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace cfsv
