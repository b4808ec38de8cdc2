#pragma once

#include <array>
#include <string>
#include <vector>

#include "cfsv/error.hpp"

namespace cfsv {

/// Constant parameters of the two-factor forward-curve model with one
/// Heston-style variance factor:
///
///   dF/F = sqrt(v) sigma (e^{-beta1 (T-t)} dz1 + R e^{-beta2 (T-t)} dz2)
///   dv   = beta (1 - v) dt + alpha sqrt(v) dz3
///
/// with corr(dz1,dz2)=rho, corr(dz1,dz3)=rho1, corr(dz2,dz3)=rho2.
/// The variance factor always starts at v(0) = 1.
struct ModelParams {
  double sigma = 0.0;  ///< volatility scale, 1/sqrt(year)
  double beta1 = 0.0;  ///< first factor mean reversion, 1/year
  double beta2 = 0.0;  ///< second factor mean reversion, 1/year
  double R = 0.0;      ///< second factor loading ratio
  double rho = 0.0;    ///< corr(z1, z2)
  double beta = 0.0;   ///< variance mean reversion, 1/year
  double alpha = 0.0;  ///< vol of vol, 1/sqrt(year)
  double rho1 = 0.0;   ///< corr(z1, z3)
  double rho2 = 0.0;   ///< corr(z2, z3)

  static constexpr double v0 = 1.0;

  bool operator==(const ModelParams&) const = default;
};

struct ParamIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ParamIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool has(ErrorCode code) const noexcept;
  std::string summary() const;
};

/// Thrown by `validated` with every violated invariant attached.
class ParamError : public InputError {
 public:
  explicit ParamError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Eigenvalues >= -kPsdTolerance count as positive semidefinite.
inline constexpr double kPsdTolerance = 1e-12;

/// Products rate*horizon below this switch exponential integrals to series.
inline constexpr double kSmallRate = 1e-6;

ValidationReport validate_params(const ModelParams& p);

/// Returns `p` unchanged, or throws ParamError listing every violation.
const ModelParams& validated(const ModelParams& p);

using Matrix3 = std::array<std::array<double, 3>, 3>;

Matrix3 correlation_matrix(const ModelParams& p);

/// Smallest eigenvalue of the 3x3 correlation matrix.
double min_correlation_eigenvalue(const ModelParams& p);

/// Lower-triangular L with L L^T equal to the correlation matrix.
struct CorrelationFactorization {
  Matrix3 lower{};

  /// Maps three independent standard normals to correlated (z1, z2, z3).
  std::array<double, 3> apply(const std::array<double, 3>& independent) const noexcept {
    return {lower[0][0] * independent[0],
            lower[1][0] * independent[0] + lower[1][1] * independent[1],
            lower[2][0] * independent[0] + lower[2][1] * independent[1] +
                lower[2][2] * independent[2]};
  }

  Matrix3 reconstruct() const noexcept;
};

CorrelationFactorization factorize_correlation(const ModelParams& p);

/// Projects (rho, rho1, rho2) onto a valid correlation matrix by clipping
/// negative eigenvalues and rescaling to unit diagonal. No-op when PSD.
ModelParams repair_correlations(const ModelParams& p);

/// Deterministic instantaneous variance rate sigma_F^2(t, T).
double sigma_f_sq(double t, double T, const ModelParams& p);

/// Integral of sigma_F^2(s, T) ds over [t0, t1].
double integrated_variance(double t0, double t1, double T, const ModelParams& p);

/// Integral of e^{-c (T - s)} ds over [t0, t1] for c >= 0; series for small c*(t1-t0).
double exp_decay_integral(double c, double t0, double t1, double T) noexcept;

namespace presets {

/// Term-structure and smile parameter set (sigma 0.4, beta1 0.1, beta2 1, ...).
ModelParams baseline();

/// Drift-approximation stress set (sigma 0.6, beta1 0.01, beta=0); alpha is swept.
ModelParams drift_study(double alpha = 1.0);

}  // namespace presets

}  // namespace cfsv
