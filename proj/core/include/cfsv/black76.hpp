#pragma once

namespace cfsv {

enum class OptionKind { Call, Put };

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

/// Black-76 price with `total_variance` = sigma^2 t and discount factor D.
double black76_price(double F, double K, double total_variance, double D, OptionKind kind);

/// dPrice/dsigma for an annualized vol over expiry t.
double black76_vega(double F, double K, double sigma, double t, double D) noexcept;

/// dPrice/dF (undiscounted delta times D).
double black76_delta(double F, double K, double sigma, double t, double D, OptionKind kind) noexcept;

/// Annualized Black-76 implied volatility. Newton with bisection safeguard
/// on [1e-6, 10]; returns 0 at the intrinsic lower bound.
double implied_vol(double price, double F, double K, double t_e, double D, OptionKind kind);

}  // namespace cfsv
