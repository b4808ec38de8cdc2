#include "cfsv/drift_factor.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>

#include "cfsv/quadrature.hpp"

namespace cfsv {

std::string_view to_string(DriftFactorMethod m) noexcept {
  switch (m) {
    case DriftFactorMethod::Numeric: return "numeric";
    case DriftFactorMethod::ClosedForm: return "closed_form";
    case DriftFactorMethod::DegenerateLimit: return "degenerate_limit";
  }
  return "unknown";
}

double DriftFactorResult::k() const noexcept { return std::sqrt(std::max(k_sq, 0.0)); }

double cov_w(double s1, double s2, double beta, double alpha) {
  if (s1 < 0.0 || s2 < 0.0) raise(ErrorCode::DomainError, "cov_w needs s1, s2 >= 0");
  const double a = std::min(s1, s2);
  const double b = std::max(s1, s2);
  const double x = 2.0 * beta * a;
  // (1 - e^{-2 beta a}) / (2 beta) = a * phi(x)
  const double phi = std::abs(x) < kSmallRate ? 1.0 - x / 2.0 + x * x / 6.0 : -std::expm1(-x) / x;
  return alpha * alpha * a * phi * std::exp(-beta * (b - a));
}

namespace {

void check_times(double t, double T) {
  if (!(t >= 0.0) || !(t <= T)) raise(ErrorCode::DomainError, "drift factor needs 0 <= t <= T");
}

struct RatioParts {
  double numerator;
  double denominator;
};

RatioParts variance_ratio(double t, double T, const ModelParams& p, std::size_t n) {
  const GaussLegendre& rule = gauss_legendre(n);
  // J is proportional to alpha^2, which cancels in the ratio.
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s2 = 0.5 * t * (1.0 + rule.nodes[i]);
    const double w2 = 0.5 * t * rule.weights[i];
    const double var2 = sigma_f_sq(s2, T, p);
    double inner_num = 0.0;
    double inner_den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s1 = 0.5 * s2 * (1.0 + rule.nodes[j]);
      const double w1 = 0.5 * s2 * rule.weights[j];
      const double J = cov_w(s1, s2, p.beta, 1.0);
      inner_num += w1 * sigma_f_sq(s1, T, p) * J;
      inner_den += w1 * J;
    }
    num += w2 * var2 * inner_num;
    den += w2 * inner_den;
  }
  return {num, den};
}

}  // namespace

DriftFactorResult k_sq_numeric(double t, double T, const ModelParams& p,
                               const NumericDriftOptions& opts) {
  check_times(t, T);
  if (p.alpha == 0.0 || t == 0.0)
    raise(ErrorCode::DegenerateDenominator, "variance of int w ds vanishes (alpha == 0 or t == 0)");

  std::size_t n = std::max<std::size_t>(opts.nodes, 2);
  auto parts = variance_ratio(t, T, p, n);
  double previous = parts.numerator / parts.denominator;
  while (2 * n <= opts.max_nodes) {
    n *= 2;
    parts = variance_ratio(t, T, p, n);
    const double current = parts.numerator / parts.denominator;
    if (std::abs(current - previous) <= opts.rel_tolerance * std::abs(current))
      return {current, DriftFactorMethod::Numeric, t, T};
    previous = current;
  }
  raise(ErrorCode::NonConvergence, "drift factor quadrature did not converge under node doubling");
}

namespace {

// Relative size below which a denominator combination counts as degenerate.
constexpr double kDegenerateRel = 0.05;
// Absolute floor for beta*t, beta1 and beta2 in the closed form.
constexpr double kDegenerateAbs = 0.05;
// Largest exponent the closed form may form before overflow/cancellation.
constexpr double kMaxExponent = 150.0;

}  // namespace

bool closed_form_applicable(double t, double T, const ModelParams& p) noexcept {
  const double b = p.beta, b1 = p.beta1, b2 = p.beta2;
  if (!(t > 0.0) || !(t <= T)) return false;
  if (b * t < kDegenerateAbs || b1 < kDegenerateAbs || b2 < kDegenerateAbs) return false;
  const double scale = std::max({b, b1, b2});
  for (double combo : {b - 2 * b1, b - 2 * b2, b - b1 - b2}) {
    if (std::abs(combo) < kDegenerateRel * scale) return false;
  }
  if (7.0 * (b1 + b2) * T > kMaxExponent || 2.0 * b * t > kMaxExponent) return false;
  return true;
}

DriftFactorResult k_sq_closed_form(double t, double T, const ModelParams& p) {
  check_times(t, T);
  if (!closed_form_applicable(t, T, p))
    raise(ErrorCode::DegenerateParameters, "closed-form drift factor has a degenerate denominator");

  using std::exp;
  const double b = p.beta, B1 = p.beta1, B2 = p.beta2, R = p.R, rho = p.rho, s = p.sigma;
  const double R2 = R * R, R3 = R2 * R, R4 = R2 * R2;
  const double bb = b * b;

  const double pre = 2.0 * std::pow(s, 4) * bb * exp(2 * b * t) /
                     (exp(2 * b * t) * (2 * b * t - 3) + 4 * exp(b * t) - 1);

  const double D12 = (b - 2 * B1) * (b - 2 * B1) * (b + 2 * B1) * (b - 2 * B2) * (b - 2 * B2) *
                     (-b + B1 + B2) * (-b + B1 + B2) * (b + B1 + B2) * (b + 2 * B2);

  // k1(T)
  const double e12 = exp((B1 - B2) * T);
  const double k1a = bb * (e12 * e12 * R2 + 2 * e12 * rho * R + 1);
  const double k1b = b * (B2 * (e12 * e12 * R2 + 4 * e12 * rho * R + 3) +
                          B1 * (3 * e12 * e12 * R2 + 4 * e12 * rho * R + 1));
  const double k1c = 2 * (B2 * B2 + B1 * (e12 * e12 * R2 + 4 * e12 * rho * R + 1) * B2 +
                          B1 * B1 * e12 * e12 * R2);
  const double k1d = bb * bb *
                     (exp(5 * B1 * T + 3 * B2 * T) * R2 + 2 * exp(4 * (B1 + B2) * T) * rho * R +
                      exp(3 * B1 * T + 5 * B2 * T));
  const double x1 = exp(2 * B1 * T), x2 = exp(2 * B2 * T), x12 = exp((B1 + B2) * T);
  const double k1ea = B1 * B1 * (5 * x1 * R2 + 8 * x12 * rho * R + x2);
  const double k1eb = 2 * B2 * (x1 * R2 + x2) * B1;
  const double k1ec = B2 * B2 * (x1 * R2 + 8 * x12 * rho * R + 5 * x2);
  const double e3 = exp(3 * (B1 + B2) * T);
  const double k1e = e3 * bb * (k1ea + k1eb + k1ec);
  const double k1fa = B1 * B1 * B2 * B2 * (x1 * R2 + 8 * x12 * rho * R + x2);
  const double k1f = 4 * e3 *
                     (x1 * R2 * std::pow(B1, 4) + 2 * B2 * x1 * R2 * std::pow(B1, 3) + k1fa +
                      2 * std::pow(B2, 3) * x2 * B1 + std::pow(B2, 4) * x2);
  const double k1def = k1d - k1e + k1f;
  const double k1 = -2 * b * exp(-7 * B1 * T - 5 * B2 * T) * (k1a - k1b + k1c) * k1def / D12;

  // k2(t,T); its second bracket equals k1's.
  const double y1 = exp(2 * B2 * t + 2 * B1 * T);
  const double y2 = exp(2 * B1 * t + 2 * B2 * T);
  const double y12 = exp((B1 + B2) * (t + T));
  const double k2a = (y1 * R2 + 2 * y12 * rho * R + y2) * bb;
  const double k2ba = B2 * (y1 * R2 + 4 * y12 * rho * R + 3 * y2);
  const double k2bb = B1 * (3 * y1 * R2 + 4 * y12 * rho * R + y2);
  const double k2b = (k2ba + k2bb) * b;
  const double k2c = 2 * (y2 * B2 * B2 + B1 * (y1 * R2 + 4 * y12 * rho * R + y2) * B2 + B1 * B1 * y1 * R2);
  const double k2 = 2 * b * exp(-b * t - 7 * (B1 + B2) * T) * (k2a - k2b + k2c) * k1def / D12;

  const double D34 = 2 * (b - 2 * B1) * (b - 2 * B1) * (b - 2 * B2) * (b - 2 * B2) *
                     (-b + B1 + B2) * (-b + B1 + B2);
  const double rho_sq = rho * rho;
  const double poly_minus = (2 * rho_sq + 1) * bb - 2 * (B1 + B2) * (2 * rho_sq + 1) * b + B1 * B1 +
                            B2 * B2 + 2 * B1 * (4 * B2 * rho_sq + B2);
  const double poly_plus = (2 * rho_sq + 1) * bb + 2 * (B1 + B2) * (2 * rho_sq + 1) * b + B1 * B1 +
                           B2 * B2 + 2 * B1 * (4 * B2 * rho_sq + B2);

  // k3(t,T)
  const double k3a = exp((B1 - B2) * T) * R2 + 2 * rho * R + exp((B2 - B1) * T);
  const double k3b =
      (b - 2 * B1) * (b - 2 * B1) * (-b + B1 + B2) * (-b + B1 + B2) * exp(-4 * B2 * T) * R4 +
      4 * (b - 2 * B1) * (b - 2 * B1) * (b - 2 * B2) * (b - B1 - B2) * exp(-(B1 + 3 * B2) * T) * rho * R3 +
      2 * (b - 2 * B1) * (b - 2 * B2) * exp(-2 * (B1 + B2) * T) * poly_minus * R2 +
      4 * (b - 2 * B1) * (b - 2 * B2) * (b - 2 * B2) * (b - B1 - B2) * exp(-(3 * B1 + B2) * T) * rho * R +
      (b - 2 * B2) * (b - 2 * B2) * (-b + B1 + B2) * (-b + B1 + B2) * exp(-4 * B1 * T);
  const double k3 = exp((B2 - B1) * T) * k3a * k3b /
                    (D34 * (R2 + 2 * exp((B2 - B1) * T) * rho * R + exp(2 * (B2 - B1) * T)));

  // k4(t,T)
  const double k4a = exp((B1 - B2) * (T - t)) * R2 + 2 * rho * R + exp((B1 - B2) * (t - T));
  const double k4b =
      (b - 2 * B1) * (b - 2 * B1) * (-b + B1 + B2) * (-b + B1 + B2) *
          exp(-2 * B1 * t + 2 * B2 * t - 4 * B2 * T) * R4 +
      4 * (b - 2 * B1) * (b - 2 * B1) * (b - 2 * B2) * (b - B1 - B2) *
          exp(B2 * (t - 3 * T) - B1 * (t + T)) * rho * R3 +
      2 * (b - 2 * B1) * (b - 2 * B2) * exp(-2 * (B1 + B2) * T) * R2 * poly_minus +
      4 * (b - 2 * B1) * (b - 2 * B2) * (b - 2 * B2) * (b - B1 - B2) *
          exp(B1 * (t - 3 * T) - B2 * (t + T)) * rho * R +
      (b - 2 * B2) * (b - 2 * B2) * (-b + B1 + B2) * (-b + B1 + B2) *
          exp(2 * B1 * t - 2 * B2 * t - 4 * B1 * T);
  const double k4 = -exp(-2 * b * t + 3 * B1 * t + B2 * t - B1 * T + B2 * T) * k4a * k4b /
                    (D34 * (R2 + 2 * exp((B1 - B2) * (t - T)) * rho * R + exp(2 * (B1 - B2) * (t - T))));

  // k5(T): the t = 0 counterpart of k6.
  const double D56 = 4 * B1 * (b + 2 * B1) * B2 * (B1 + B2) * (b + B1 + B2) * (3 * B1 + B2) *
                     (b + 2 * B2) * (B1 + 3 * B2);
  const double k5a = exp((B2 - B1) * T) * (exp((B1 - B2) * T) * R2 + 2 * rho * R + exp((B2 - B1) * T));
  const double k5b = B1 * (b + 2 * B1) * (B1 + B2) * (b + B1 + B2) * (3 * B1 + B2) * (B1 + 3 * B2) *
                     exp(-4 * B2 * T) * R4;
  const double k5c = 8 * B1 * (b + 2 * B1) * B2 * (B1 + B2) * (3 * B1 + B2) * (2 * b + B1 + 3 * B2) *
                     exp(-(B1 + 3 * B2) * T) * rho * R3;
  const double k5d = 4 * B1 * B2 * (3 * B1 + B2) * (B1 + 3 * B2) * exp(-2 * (B1 + B2) * T) * poly_plus * R2;
  const double k5e = 8 * B1 * B2 * (B1 + B2) * (2 * b + 3 * B1 + B2) * (b + 2 * B2) * (B1 + 3 * B2) *
                     exp(-(3 * B1 + B2) * T) * rho * R;
  const double k5f = B2 * (B1 + B2) * (b + B1 + B2) * (3 * B1 + B2) * (b + 2 * B2) * (B1 + 3 * B2) *
                     exp(-4 * B1 * T);
  const double k5h = R2 + 2 * exp((B2 - B1) * T) * rho * R + exp(2 * (B2 - B1) * T);
  const double k5 = -k5a * (k5b + k5c + k5d + k5e + k5f) / (D56 * k5h);

  // k6(t,T)
  const double k6a = exp(3 * B1 * t + B2 * t - B1 * T + B2 * T) *
                     (exp((B1 - B2) * (T - t)) * R2 + 2 * rho * R + exp((B1 - B2) * (t - T)));
  const double k6b = B1 * (b + 2 * B1) * (B1 + B2) * (b + B1 + B2) * (3 * B1 + B2) * (B1 + 3 * B2) *
                     exp(-2 * B1 * t + 2 * B2 * t - 4 * B2 * T) * R4;
  const double k6c = 8 * B1 * (b + 2 * B1) * B2 * (B1 + B2) * (3 * B1 + B2) * (2 * b + B1 + 3 * B2) *
                     exp(B2 * (t - 3 * T) - B1 * (t + T)) * rho * R3;
  const double k6de = 4 * B1 * B2 * (3 * B1 + B2) * (B1 + 3 * B2) * exp(-2 * (B1 + B2) * T) * R2 * poly_plus;
  const double k6f = 8 * B1 * B2 * (B1 + B2) * (2 * b + 3 * B1 + B2) * (b + 2 * B2) * (B1 + 3 * B2) *
                     exp(B1 * (t - 3 * T) - B2 * (t + T)) * rho * R;
  const double k6g = B2 * (B1 + B2) * (b + B1 + B2) * (3 * B1 + B2) * (b + 2 * B2) * (B1 + 3 * B2) *
                     exp(2 * B1 * t - 2 * B2 * t - 4 * B1 * T);
  const double k6i = R2 + 2 * exp((B1 - B2) * (t - T)) * rho * R + exp(2 * (B1 - B2) * (t - T));
  const double k6 = k6a * (k6b + k6c + k6de + k6f + k6g) / (D56 * k6i);

  const double k_sq = pre * (k1 + k2 + k3 + k4 + k5 + k6);
  if (!std::isfinite(k_sq) || k_sq < 0.0)
    raise(ErrorCode::DegenerateParameters, "closed-form drift factor lost precision");
  return {k_sq, DriftFactorMethod::ClosedForm, t, T};
}

ClosedFormCheck verify_closed_form(std::size_t samples, std::uint64_t seed, double rel_tolerance) {
  ClosedFormCheck check;
  check.samples = samples;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t attempts = 0;
  while (check.evaluated < samples && attempts < 100 * samples) {
    ++attempts;
    ModelParams p;
    p.sigma = 0.2 + 0.6 * u(gen);
    p.beta1 = 0.05 + 1.95 * u(gen);
    p.beta2 = 0.05 + 1.95 * u(gen);
    p.R = u(gen);
    p.rho = -0.8 + 1.6 * u(gen);
    p.beta = 0.1 + 2.9 * u(gen);
    p.alpha = 1.0;
    const double t = 0.2 + 1.8 * u(gen);
    const double T = t + 2.0 * u(gen);
    if (!closed_form_applicable(t, T, p)) continue;
    const double exact = k_sq_numeric(t, T, p).k_sq;
    const double fast = k_sq_closed_form(t, T, p).k_sq;
    check.max_rel_diff = std::max(check.max_rel_diff, std::abs(fast - exact) / exact);
    ++check.evaluated;
  }
  check.passed = check.evaluated == samples && check.max_rel_diff <= rel_tolerance;
  return check;
}

const ClosedFormCheck& closed_form_gate() {
  static const ClosedFormCheck gate = verify_closed_form();
  return gate;
}

DriftFactorResult k_sq_degenerate_limit(double t, double T, const ModelParams& p) {
  check_times(t, T);
  const double avg = t > 0.0 ? integrated_variance(0.0, t, T, p) / t : sigma_f_sq(0.0, T, p);
  return {avg * avg, DriftFactorMethod::DegenerateLimit, t, T};
}

DriftFactorResult k_factor(double t, double T, const ModelParams& p) {
  check_times(t, T);
  if (p.alpha == 0.0 || t == 0.0) return k_sq_degenerate_limit(t, T, p);
  if (closed_form_applicable(t, T, p) && closed_form_gate().passed) {
    return k_sq_closed_form(t, T, p);
  }
  return k_sq_numeric(t, T, p);
}

void write_k_table(std::ostream& out, std::span<const DriftFactorResult> rows) {
  out << "t,T,k_sq,method\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.t << ',' << r.T << ',' << r.k_sq << ',' << to_string(r.method) << '\n';
}

}  // namespace cfsv
