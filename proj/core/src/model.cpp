#include "cfsv/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfsv {

bool ValidationReport::has(ErrorCode code) const noexcept {
  return std::any_of(issues.begin(), issues.end(),
                     [code](const ParamIssue& i) { return i.code == code; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << "; ";
    out << to_string(issues[i].code) << " (" << issues[i].message << ")";
  }
  return out.str();
}

ParamError::ParamError(ValidationReport report)
    : InputError(report.issues.empty() ? ErrorCode::DomainError : report.issues.front().code,
                 "invalid model parameters: " + report.summary()),
      report_(std::move(report)) {}

namespace {

Eigen::Matrix3d to_eigen(const Matrix3& m) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m[i][j];
  return out;
}

}  // namespace

ValidationReport validate_params(const ModelParams& p) {
  ValidationReport report;
  auto add = [&](ErrorCode code, std::string msg) {
    report.issues.push_back({code, std::move(msg)});
  };

  const std::array<std::pair<const char*, double>, 9> all{{{"sigma", p.sigma},
                                                           {"beta1", p.beta1},
                                                           {"beta2", p.beta2},
                                                           {"R", p.R},
                                                           {"rho", p.rho},
                                                           {"beta", p.beta},
                                                           {"alpha", p.alpha},
                                                           {"rho1", p.rho1},
                                                           {"rho2", p.rho2}}};
  bool finite = true;
  for (const auto& [name, value] : all) {
    if (!std::isfinite(value)) {
      add(ErrorCode::NonFiniteParameter, std::string(name) + " is not finite");
      finite = false;
    }
  }
  if (!finite) return report;

  if (!(p.sigma > 0.0)) add(ErrorCode::NonPositiveSigma, "sigma must be > 0");
  for (const auto& [name, value] : {std::pair{"beta1", p.beta1}, std::pair{"beta2", p.beta2},
                                    std::pair{"beta", p.beta}, std::pair{"alpha", p.alpha}}) {
    if (value < 0.0) add(ErrorCode::NegativeRate, std::string(name) + " must be >= 0");
  }
  bool in_range = true;
  for (const auto& [name, value] : {std::pair{"rho", p.rho}, std::pair{"rho1", p.rho1},
                                    std::pair{"rho2", p.rho2}}) {
    if (value < -1.0 || value > 1.0) {
      add(ErrorCode::CorrelationOutOfRange, std::string(name) + " outside [-1, 1]");
      in_range = false;
    }
  }
  if (in_range) {
    const double lambda = min_correlation_eigenvalue(p);
    if (lambda < -kPsdTolerance) {
      std::ostringstream msg;
      msg << "correlation matrix has eigenvalue " << lambda;
      add(ErrorCode::CorrelationMatrixNotPSD, msg.str());
    }
  }
  return report;
}

const ModelParams& validated(const ModelParams& p) {
  auto report = validate_params(p);
  if (!report.ok()) throw ParamError(std::move(report));
  return p;
}

Matrix3 correlation_matrix(const ModelParams& p) {
  return {{{1.0, p.rho, p.rho1}, {p.rho, 1.0, p.rho2}, {p.rho1, p.rho2, 1.0}}};
}

double min_correlation_eigenvalue(const ModelParams& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(to_eigen(correlation_matrix(p)),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Matrix3 CorrelationFactorization::reconstruct() const noexcept {
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += lower[i][k] * lower[j][k];
      out[i][j] = s;
    }
  return out;
}

CorrelationFactorization factorize_correlation(const ModelParams& p) {
  if (min_correlation_eigenvalue(p) < -kPsdTolerance)
    raise(ErrorCode::CorrelationMatrixNotPSD, "cannot factorize correlation matrix");

  // Cholesky that tolerates zero pivots (rank-deficient but PSD input).
  const Matrix3 c = correlation_matrix(p);
  CorrelationFactorization f;
  auto& l = f.lower;
  for (int j = 0; j < 3; ++j) {
    double d = c[j][j];
    for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (d <= 1e-14) {
      l[j][j] = 0.0;
      for (int i = j + 1; i < 3; ++i) l[i][j] = 0.0;
      continue;
    }
    l[j][j] = std::sqrt(d);
    for (int i = j + 1; i < 3; ++i) {
      double s = c[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  return f;
}

ModelParams repair_correlations(const ModelParams& p) {
  if (min_correlation_eigenvalue(p) >= 0.0) return p;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(to_eigen(correlation_matrix(p)));
  Eigen::Vector3d lambda = solver.eigenvalues().cwiseMax(1e-10);
  Eigen::Matrix3d m = solver.eigenvectors() * lambda.asDiagonal() * solver.eigenvectors().transpose();
  Eigen::Vector3d scale = m.diagonal().cwiseSqrt().cwiseInverse();
  m = scale.asDiagonal() * m * scale.asDiagonal();
  ModelParams out = p;
  out.rho = std::clamp(m(0, 1), -1.0, 1.0);
  out.rho1 = std::clamp(m(0, 2), -1.0, 1.0);
  out.rho2 = std::clamp(m(1, 2), -1.0, 1.0);
  return out;
}

double sigma_f_sq(double t, double T, const ModelParams& p) {
  if (t < 0.0 || t > T) raise(ErrorCode::DomainError, "sigma_f_sq requires 0 <= t <= T");
  const double h = T - t;
  const double e1 = std::exp(-p.beta1 * h);
  const double e2 = std::exp(-p.beta2 * h);
  const double v = p.sigma * p.sigma * (e1 * e1 + p.R * p.R * e2 * e2 + 2.0 * p.rho * p.R * e1 * e2);
  // Nonnegative for |rho| <= 1; only rounding can push it below zero.
  return std::max(v, 0.0);
}

double exp_decay_integral(double c, double t0, double t1, double T) noexcept {
  const double h = t1 - t0;
  const double x = c * h;
  double phi;  // (1 - e^{-x}) / x
  if (std::abs(x) < kSmallRate)
    phi = 1.0 - x / 2.0 + x * x / 6.0;
  else
    phi = -std::expm1(-x) / x;
  return std::exp(-c * (T - t1)) * h * phi;
}

double integrated_variance(double t0, double t1, double T, const ModelParams& p) {
  if (t0 < 0.0 || t0 > t1 || t1 > T)
    raise(ErrorCode::DomainError, "integrated_variance requires 0 <= t0 <= t1 <= T");
  const double s2 = p.sigma * p.sigma;
  return s2 * (exp_decay_integral(2.0 * p.beta1, t0, t1, T) +
               p.R * p.R * exp_decay_integral(2.0 * p.beta2, t0, t1, T) +
               2.0 * p.rho * p.R * exp_decay_integral(p.beta1 + p.beta2, t0, t1, T));
}

namespace presets {

ModelParams baseline() {
  return ModelParams{.sigma = 0.4, .beta1 = 0.1, .beta2 = 1.0, .R = 0.5, .rho = -0.3,
                     .beta = 0.5, .alpha = 1.0, .rho1 = 0.3, .rho2 = 0.3};
}

ModelParams drift_study(double alpha) {
  return ModelParams{.sigma = 0.6, .beta1 = 0.01, .beta2 = 1.0, .R = 0.5, .rho = -0.3,
                     .beta = 0.0, .alpha = alpha, .rho1 = 0.3, .rho2 = 0.3};
}

}  // namespace presets

}  // namespace cfsv
