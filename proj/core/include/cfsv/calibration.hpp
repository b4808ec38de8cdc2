#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cfsv/curves.hpp"
#include "cfsv/fourier_pricer.hpp"
#include "cfsv/model.hpp"

namespace cfsv {

struct VolQuote {
  double t_e = 1.0;
  double T = 1.0;
  double strike = 1.0;
  double market_vol = 0.2;
  double weight = 1.0;
};

void validate(const VolQuote& q);

/// Objective contribution of a quote whose model vol cannot be computed.
inline constexpr double kFailedQuotePenalty = 1e3;

/// Sum of weight * (model_vol - market_vol)^2 with call vols from the Fourier
/// pricer. Quotes sharing (t_e, T) share one characteristic-function slice.
/// Invalid parameters or failed pricing cost kFailedQuotePenalty per quote.
double objective(const ModelParams& p, std::span<const VolQuote> quotes, const MarketCurves& curves,
                 const QuadratureConfig& q = {});

/// Box constraints in natural units, applied after the inverse transform.
struct ParamBounds {
  ModelParams lower;
  ModelParams upper;

  static ParamBounds defaults();
};

void validate(const ParamBounds& b);

struct FitOptions {
  std::size_t budget = 2000;          ///< maximum objective evaluations
  double objective_target = 1e-14;    ///< stop as soon as the best objective is this small
  double f_tolerance = 1e-12;         ///< simplex objective spread
  double x_tolerance = 1e-6;          ///< simplex size in transformed coordinates
  double initial_step = 0.1;          ///< simplex edge in transformed coordinates
  double penalty_weight = 0.0;        ///< quadratic pull toward the initial point (transformed space)
  QuadratureConfig quadrature{};
};

enum class FitStatus { Converged, BudgetExhausted };

std::string_view to_string(FitStatus s) noexcept;

struct CalibrationResult {
  ModelParams params;
  double objective = 0.0;  ///< unpenalized objective at params
  std::size_t n_evals = 0;
  bool converged = false;
  FitStatus status = FitStatus::BudgetExhausted;
};

/// Unconstrained coordinates: logs of sigma, beta1, beta2, beta, alpha
/// (floored at 1e-10), R as is, atanh of the correlations.
std::vector<double> to_unconstrained(const ModelParams& p);
/// Inverse map followed by clamping to bounds and correlation repair.
ModelParams from_unconstrained(std::span<const double> x, const ParamBounds& bounds);

/// Nelder-Mead least squares on implied vols. Returns the best point seen;
/// status is BudgetExhausted (converged = false) if the budget runs out.
CalibrationResult fit(std::span<const VolQuote> quotes, const MarketCurves& curves, const ModelParams& initial,
                      const ParamBounds& bounds = ParamBounds::defaults(), const FitOptions& options = {});

}  // namespace cfsv
