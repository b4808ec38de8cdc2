#include "cfsv/black76.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cfsv/error.hpp"

namespace cfsv {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double black76_price(double F, double K, double total_variance, double D, OptionKind kind) {
  if (!(F > 0.0) || !(K > 0.0)) raise(ErrorCode::DomainError, "Black-76 needs F > 0 and K > 0");
  if (total_variance < 0.0) raise(ErrorCode::DomainError, "total variance must be >= 0");
  const double sign = kind == OptionKind::Call ? 1.0 : -1.0;
  if (total_variance == 0.0) return D * std::max(sign * (F - K), 0.0);
  const double sd = std::sqrt(total_variance);
  const double d1 = std::log(F / K) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  return D * sign * (F * normal_cdf(sign * d1) - K * normal_cdf(sign * d2));
}

double black76_vega(double F, double K, double sigma, double t, double D) noexcept {
  if (sigma <= 0.0 || t <= 0.0) return 0.0;
  const double sd = sigma * std::sqrt(t);
  const double d1 = std::log(F / K) / sd + 0.5 * sd;
  return D * F * normal_pdf(d1) * std::sqrt(t);
}

double black76_delta(double F, double K, double sigma, double t, double D,
                     OptionKind kind) noexcept {
  const double sd = sigma * std::sqrt(std::max(t, 0.0));
  double n;
  if (sd <= 0.0)
    n = F > K ? 1.0 : (F < K ? 0.0 : 0.5);
  else
    n = normal_cdf(std::log(F / K) / sd + 0.5 * sd);
  return kind == OptionKind::Call ? D * n : D * (n - 1.0);
}

double implied_vol(double price, double F, double K, double t_e, double D, OptionKind kind) {
  if (!(t_e > 0.0)) raise(ErrorCode::DomainError, "implied vol needs t_e > 0");
  if (!(F > 0.0) || !(K > 0.0) || !(D > 0.0))
    raise(ErrorCode::DomainError, "implied vol needs F, K, D > 0");

  const double lower = kind == OptionKind::Call ? D * std::max(F - K, 0.0) : D * std::max(K - F, 0.0);
  const double upper = kind == OptionKind::Call ? D * F : D * K;
  const double scale = D * std::max(F, K);
  const double slack = 1e-14 * scale;
  if (!std::isfinite(price) || price < lower - slack || price > upper + slack) {
    std::ostringstream msg;
    msg << "price " << price << " outside no-arbitrage bounds [" << lower << ", " << upper << "]";
    raise(ErrorCode::NoArbitrageViolation, msg.str());
  }
  if (price <= lower) return 0.0;

  constexpr double kLo = 1e-6;
  constexpr double kHi = 10.0;
  auto f = [&](double s) { return black76_price(F, K, s * s * t_e, D, kind) - price; };

  double lo = kLo, hi = kHi;
  const double f_lo = f(lo);
  if (f_lo >= 0.0) {
    // Between intrinsic and the vol floor: bisect down to zero.
    lo = 0.0;
    hi = kLo;
  } else if (f(hi) <= 0.0) {
    return kHi;
  }

  double s = std::clamp(std::sqrt(2.0 * std::numbers::pi / t_e) * (price - lower) / (D * F), lo, hi);
  if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
  const double tol = 1e-14 * scale;
  for (int iter = 0; iter < 200; ++iter) {
    const double value = f(s);
    if (std::abs(value) <= tol) return s;
    if (value > 0.0)
      hi = s;
    else
      lo = s;
    const double vega = black76_vega(F, K, s, t_e, D);
    double next = vega > 0.0 ? s - value / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, hi)) return next;
    s = next;
  }
  return s;
}

}  // namespace cfsv
