#include <gtest/gtest.h>

#include <cmath>

#include "cfsv/calibration.hpp"
#include "cfsv/error.hpp"

using namespace cfsv;

namespace {

const auto kFlat = MarketCurves::flat(1.0);

std::vector<VolQuote> synthetic_quotes(const ModelParams& p) {
  std::vector<VolQuote> q;
  for (double te : {0.5, 1.0, 2.0})
    for (double K : {0.8, 1.0, 1.25}) {
      const double price = call_price({te, te, K}, kFlat, p);
      q.push_back({te, te, K, implied_vol(price, 1.0, K, te, 1.0, OptionKind::Call), 1.0});
    }
  return q;
}

}  // namespace

TEST(Objective, SelfFitIsZero) {
  const auto q = synthetic_quotes(presets::baseline());
  EXPECT_LE(objective(presets::baseline(), q, kFlat), 1e-10);
}

TEST(Objective, ZeroWeightContributesNothing) {
  const std::vector<VolQuote> q{{1.0, 1.0, 1.0, 0.9, 0.0}};
  EXPECT_EQ(objective(presets::baseline(), q, kFlat), 0.0);
}

TEST(Objective, PerturbedSigmaIsWorse) {
  const auto q = synthetic_quotes(presets::baseline());
  auto p = presets::baseline();
  p.sigma += 0.05;
  EXPECT_GE(objective(p, q, kFlat) - objective(presets::baseline(), q, kFlat), 1e-4);
}

TEST(Objective, InvalidParametersArePenalized) {
  const auto q = synthetic_quotes(presets::baseline());
  auto p = presets::baseline();
  p.sigma = -1.0;
  EXPECT_DOUBLE_EQ(objective(p, q, kFlat), kFailedQuotePenalty * q.size());
}

TEST(Objective, FailedPricingIsPenalizedNotThrown) {
  QuadratureConfig tight;
  tight.theta_max = 2.0;
  tight.panel_width = 1.0;
  const std::vector<VolQuote> q{{0.1, 0.1, 1.0, 0.3, 1.0}};
  EXPECT_DOUBLE_EQ(objective(presets::baseline(), q, kFlat, tight), kFailedQuotePenalty);
}

TEST(Objective, RejectsBadQuotes) {
  EXPECT_THROW(objective(presets::baseline(), std::vector<VolQuote>{}, kFlat), InputError);
  const std::vector<VolQuote> q{{1.0, 1.0, 1.0, -0.2, 1.0}};
  EXPECT_THROW(objective(presets::baseline(), q, kFlat), InputError);
}

TEST(Transform, RoundTrip) {
  const auto p = presets::baseline();
  const auto x = to_unconstrained(p);
  const auto back = from_unconstrained(x, ParamBounds::defaults());
  EXPECT_NEAR(back.sigma, p.sigma, 1e-14);
  EXPECT_NEAR(back.beta1, p.beta1, 1e-14);
  EXPECT_NEAR(back.rho, p.rho, 1e-14);
  EXPECT_NEAR(back.rho2, p.rho2, 1e-14);
  // The log floor maps zero rates back to zero.
  const auto z = from_unconstrained(to_unconstrained(presets::drift_study(0.0)), ParamBounds::defaults());
  EXPECT_EQ(z.beta, 0.0);
  EXPECT_EQ(z.alpha, 0.0);
}

TEST(Transform, RepairsCorrelations) {
  auto x = to_unconstrained(presets::baseline());
  x[4] = std::atanh(0.9);
  x[7] = std::atanh(0.9);
  x[8] = std::atanh(-0.9);
  EXPECT_TRUE(validate_params(from_unconstrained(x, ParamBounds::defaults())).ok());
}

TEST(Fit, BudgetOfOneReturnsInitial) {
  const auto q = synthetic_quotes(presets::baseline());
  auto start = presets::baseline();
  start.sigma = 0.5;
  FitOptions opt;
  opt.budget = 1;
  const auto r = fit(q, kFlat, start, ParamBounds::defaults(), opt);
  EXPECT_EQ(r.status, FitStatus::BudgetExhausted);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.params, start);
  EXPECT_EQ(r.n_evals, 1u);
}

TEST(Fit, StartingAtTruthConvergesImmediately) {
  const auto q = synthetic_quotes(presets::baseline());
  const auto r = fit(q, kFlat, presets::baseline());
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.objective, 1e-10);
  EXPECT_LE(r.n_evals, 10u);
}

TEST(Fit, ImprovesAndStaysValid) {
  const auto q = synthetic_quotes(presets::baseline());
  auto start = presets::baseline();
  start.sigma *= 1.2;
  start.beta1 *= 0.8;
  start.alpha *= 1.2;
  FitOptions opt;
  opt.budget = 150;
  const auto r = fit(q, kFlat, start, ParamBounds::defaults(), opt);
  EXPECT_LE(r.n_evals, 150u);
  EXPECT_TRUE(validate_params(r.params).ok());
  EXPECT_LT(r.objective, objective(start, q, kFlat));
  EXPECT_DOUBLE_EQ(r.objective, objective(r.params, q, kFlat));
  // Deterministic.
  const auto r2 = fit(q, kFlat, start, ParamBounds::defaults(), opt);
  EXPECT_EQ(r2.params, r.params);
  EXPECT_EQ(r2.n_evals, r.n_evals);
}

TEST(Fit, PenaltyKeepsCloserToStart) {
  const auto q = synthetic_quotes(presets::baseline());
  auto start = presets::baseline();
  start.sigma = 0.5;
  FitOptions opt;
  opt.budget = 120;
  const auto free = fit(q, kFlat, start, ParamBounds::defaults(), opt);
  opt.penalty_weight = 10.0;
  const auto pulled = fit(q, kFlat, start, ParamBounds::defaults(), opt);
  EXPECT_LE(std::abs(pulled.params.sigma - start.sigma), std::abs(free.params.sigma - start.sigma) + 1e-12);
}
