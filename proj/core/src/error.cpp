#include "cfsv/error.hpp"

namespace cfsv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorCode::CorrelationMatrixNotPSD: return "CorrelationMatrixNotPSD";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidCurve: return "InvalidCurve";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingSettlement: return "MissingSettlement";
    case ErrorCode::NoArbitrageViolation: return "NoArbitrageViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::QuadratureTailError: return "QuadratureTailError";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DegenerateParameters: return "DegenerateParameters";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::QuadratureTailError:
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::DegenerateParameters:
      return false;
    default:
      return true;
  }
}

void raise(ErrorCode code, const std::string& what) {
  std::string msg = std::string(to_string(code)) + ": " + what;
  if (is_input_error(code)) throw InputError(code, msg);
  throw NumericalError(code, msg);
}

}  // namespace cfsv
