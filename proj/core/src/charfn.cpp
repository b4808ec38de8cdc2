#include "cfsv/charfn.hpp"

#include <cmath>
#include <string>

namespace cfsv {

namespace {

constexpr cplx kI{0.0, 1.0};

double coupling_at(double tau, double t_e, double T, const ModelParams& p) {
  return p.alpha * p.sigma *
         (std::exp(-p.beta1 * tau) * std::exp(-p.beta1 * (T - t_e)) * p.rho1 +
          p.R * std::exp(-p.beta2 * tau) * std::exp(-p.beta2 * (T - t_e)) * p.rho2);
}

void check_times(double t_e, double T) {
  if (!(t_e >= 0.0) || !(t_e <= T))
    raise(ErrorCode::DomainError, "characteristic function requires 0 <= t_e <= T");
}

}  // namespace

RiccatiRates ode_rhs(double tau, cplx A, cplx B, cplx theta, double t_e, double T,
                     const ModelParams& p) {
  (void)A;
  const double var = sigma_f_sq(t_e - tau, T, p);
  const double c = coupling_at(tau, t_e, T, p);
  const cplx dB = -0.5 * (theta * theta + kI * theta) * var - p.beta * B +
                  0.5 * p.alpha * p.alpha * B * B + kI * theta * B * c;
  return {p.beta * B, dB};
}

std::size_t default_ode_steps(double t_e) {
  const auto n = static_cast<std::size_t>(std::ceil(200.0 * t_e));
  return std::max<std::size_t>(n, 50);
}

RiccatiSchedule::RiccatiSchedule(double t_e, double T, const ModelParams& p,
                                 std::size_t n_steps)
    : t_e_(t_e),
      T_(T),
      beta_(p.beta),
      half_alpha_sq_(0.5 * p.alpha * p.alpha),
      n_steps_(n_steps) {
  check_times(t_e, T);
  if (n_steps == 0) raise(ErrorCode::InvalidConfig, "RK4 needs at least one step");
  const std::size_t samples = 2 * n_steps + 1;
  variance_.resize(samples);
  coupling_.resize(samples);
  const double half_h = 0.5 * t_e / static_cast<double>(n_steps);
  for (std::size_t k = 0; k < samples; ++k) {
    const double tau = std::min(t_e, half_h * static_cast<double>(k));
    variance_[k] = sigma_f_sq(t_e - tau, T, p);
    coupling_[k] = coupling_at(tau, t_e, T, p);
  }
}

CharFnPoint RiccatiSchedule::solve(cplx theta) const {
  const double h = t_e_ / static_cast<double>(n_steps_);
  const cplx forcing = -0.5 * (theta * theta + kI * theta);
  const cplx i_theta = kI * theta;
  const double beta = beta_;
  const double q = half_alpha_sq_;

  auto dB = [&](std::size_t k, cplx B) {
    return forcing * variance_[k] - beta * B + q * B * B + i_theta * coupling_[k] * B;
  };

  cplx A{0.0, 0.0};
  cplx B{0.0, 0.0};
  for (std::size_t n = 0; n < n_steps_; ++n) {
    const std::size_t k0 = 2 * n;
    const cplx b1 = dB(k0, B);
    const cplx B2 = B + 0.5 * h * b1;
    const cplx b2 = dB(k0 + 1, B2);
    const cplx B3 = B + 0.5 * h * b2;
    const cplx b3 = dB(k0 + 1, B3);
    const cplx B4 = B + h * b3;
    const cplx b4 = dB(k0 + 2, B4);
    // dA/dtau = beta B, so A's stages reuse the B stage values.
    A += h / 6.0 * beta * (B + 2.0 * B2 + 2.0 * B3 + B4);
    B += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    if (!(std::abs(B) <= kRiccatiOverflow)) {
      raise(ErrorCode::NonConvergence,
            "Riccati solution overflow at tau=" + std::to_string(h * static_cast<double>(n + 1)) +
                " (theta=" + std::to_string(theta.real()) + ")");
    }
  }
  return {theta, A, B, t_e_};
}

CharFnPoint integrate_AB(double theta, double t_e, double T, const ModelParams& p,
                         std::size_t n_steps) {
  return RiccatiSchedule(t_e, T, p, n_steps).solve(cplx{theta, 0.0});
}

cplx charfn_eval(double theta, double x, double v, double t_e, double T, const ModelParams& p,
                 std::size_t n_steps) {
  if (v < 0.0) raise(ErrorCode::DomainError, "variance state must be >= 0");
  if (theta == 0.0) return {1.0, 0.0};
  const auto pt = integrate_AB(theta, t_e, T, p, n_steps);
  return std::exp(kI * theta * x + pt.A + pt.B * v);
}

}  // namespace cfsv
