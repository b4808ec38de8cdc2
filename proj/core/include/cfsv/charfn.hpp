#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cfsv/model.hpp"

namespace cfsv {

using cplx = std::complex<double>;

/// Solution (A, B) of the Riccati pair at time-to-expiry `tau` for Fourier
/// argument `theta`; the characteristic function is exp(i theta x + A + B v).
struct CharFnPoint {
  cplx theta;
  cplx A;
  cplx B;
  double tau = 0.0;
};

struct RiccatiRates {
  cplx dA;
  cplx dB;
};

/// |B| above this aborts integration with NonConvergence.
inline constexpr double kRiccatiOverflow = 1e12;

/// Right-hand side of the A/B system; sigma_F^2 is evaluated at calendar time t_e - tau.
RiccatiRates ode_rhs(double tau, cplx A, cplx B, cplx theta, double t_e, double T,
                     const ModelParams& p);

/// 200 steps per year of expiry, never fewer than 50.
std::size_t default_ode_steps(double t_e);

/// Theta-independent coefficients of the Riccati system sampled on a fixed
/// RK4 grid over [0, t_e]. Build once per (t_e, T, params), then solve for
/// many Fourier arguments.
class RiccatiSchedule {
 public:
  RiccatiSchedule(double t_e, double T, const ModelParams& p, std::size_t n_steps);

  /// Classical RK4 from tau = 0 (A = B = 0) to tau = t_e.
  CharFnPoint solve(cplx theta) const;

  double expiry() const noexcept { return t_e_; }
  double settlement() const noexcept { return T_; }
  std::size_t steps() const noexcept { return n_steps_; }

 private:
  double t_e_;
  double T_;
  double beta_;
  double half_alpha_sq_;
  std::size_t n_steps_;
  // Sampled at tau = k h / 2, k = 0..2 n_steps.
  std::vector<double> variance_;
  std::vector<double> coupling_;
};

CharFnPoint integrate_AB(double theta, double t_e, double T, const ModelParams& p,
                         std::size_t n_steps);

/// f(theta) = E[exp(i theta x(t_e, T))] given state (x, v) at t = 0.
cplx charfn_eval(double theta, double x, double v, double t_e, double T, const ModelParams& p,
                 std::size_t n_steps);

}  // namespace cfsv
