#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cfsv/drift_factor.hpp"
#include "cfsv/error.hpp"
#include "oracles.hpp"

using namespace cfsv;

namespace {

// Brute-force k^2 on the triangle s1 < s2 < t with nested Simpson rules.
double k_sq_brute(double t, double T, const ModelParams& p, int n = 200) {
  auto J = [&](double s1, double s2) {
    const double b = p.beta;
    const double lo = std::min(s1, s2), gap = std::abs(s2 - s1);
    if (b == 0.0) return p.alpha * p.alpha * lo;
    return p.alpha * p.alpha / (2 * b) * (1 - std::exp(-2 * b * lo)) * std::exp(-b * gap);
  };
  auto sf = [&](double s) { return oracle::sigma_f_sq(s, T, p.sigma, p.beta1, p.beta2, p.R, p.rho); };
  auto num_inner = [&](double s2) { return oracle::simpson([&](double s1) { return sf(s1) * J(s1, s2); }, 0, s2, n); };
  auto den_inner = [&](double s2) { return oracle::simpson([&](double s1) { return J(s1, s2); }, 0, s2, n); };
  const double num = oracle::simpson([&](double s2) { return sf(s2) * num_inner(s2); }, 0, t, n);
  const double den = oracle::simpson(den_inner, 0, t, n);
  return num / den;
}

}  // namespace

TEST(CovW, Limits) {
  EXPECT_NEAR(cov_w(0.3, 0.7, 0.0, 2.0), 4.0 * 0.3, 1e-15);
  EXPECT_NEAR(cov_w(0.3, 0.7, 1e-9, 2.0), 4.0 * 0.3, 1e-8);
  EXPECT_DOUBLE_EQ(cov_w(0.4, 0.9, 0.5, 1.0), cov_w(0.9, 0.4, 0.5, 1.0));
  EXPECT_NEAR(cov_w(1.0, 1.0, 0.5, 1.0), (1 - std::exp(-1.0)), 1e-15);
}

TEST(DriftFactor, NumericMatchesBruteForce) {
  for (const auto& p : {presets::baseline(), presets::drift_study(1.0), presets::drift_study(3.0)}) {
    for (auto [t, T] : {std::pair{1.0, 2.0}, {0.5, 0.5}, {2.0, 5.0}}) {
      const double ref = k_sq_brute(t, T, p);
      EXPECT_NEAR(k_sq_numeric(t, T, p).k_sq, ref, 1e-8 * ref) << t << " " << T;
    }
  }
}

TEST(DriftFactor, IndependentOfAlpha) {
  auto p = presets::baseline();
  const double a = k_sq_numeric(1.0, 2.0, p).k_sq;
  p.alpha = 2.7;
  EXPECT_NEAR(k_sq_numeric(1.0, 2.0, p).k_sq, a, 1e-12 * a);
}

TEST(DriftFactor, ConstantVolLimit) {
  auto p = presets::baseline();
  p.beta1 = p.beta2 = 0.0;
  const double c = p.sigma * p.sigma * (1 + p.R * p.R + 2 * p.rho * p.R);
  EXPECT_NEAR(k_factor(1.0, 3.0, p).k(), c, 1e-12 * c);
}

TEST(DriftFactor, DegenerateCases) {
  auto p = presets::baseline();
  p.alpha = 0.0;
  try {
    k_sq_numeric(1.0, 2.0, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDenominator);
  }
  const auto r = k_factor(1.0, 2.0, p);
  EXPECT_EQ(r.method, DriftFactorMethod::DegenerateLimit);
  const double avg = oracle::simpson(
                         [&](double s) { return oracle::sigma_f_sq(s, 2.0, p.sigma, p.beta1, p.beta2, p.R, p.rho); },
                         0, 1, 2000);
  EXPECT_NEAR(r.k(), avg, 1e-10);
  const auto r0 = k_factor(0.0, 2.0, presets::baseline());
  EXPECT_EQ(r0.method, DriftFactorMethod::DegenerateLimit);
  EXPECT_NEAR(r0.k(), sigma_f_sq(0.0, 2.0, presets::baseline()), 1e-14);
}

TEST(DriftFactor, ClosedFormMatchesNumericOnRandomTuples) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 60; ++i) {
    ModelParams p = presets::baseline();
    p.beta1 = 0.05 + 2.0 * u(rng);
    p.beta2 = 0.05 + 3.0 * u(rng);
    p.beta = 0.1 + 3.0 * u(rng);
    p.R = -1.0 + 2.0 * u(rng);
    p.rho = -0.9 + 1.8 * u(rng);
    const double t = 0.2 + 3.0 * u(rng);
    const double T = t + 2.0 * u(rng);
    if (!closed_form_applicable(t, T, p)) continue;
    const double cf = k_sq_closed_form(t, T, p).k_sq;
    const double num = k_sq_numeric(t, T, p).k_sq;
    EXPECT_NEAR(cf, num, 1e-6 * std::abs(num));
    ++checked;
  }
  EXPECT_GE(checked, 50);
}

TEST(DriftFactor, GateAndDispatch) {
  const auto& g = closed_form_gate();
  EXPECT_TRUE(g.passed);
  EXPECT_GE(g.evaluated, 50u);
  EXPECT_LT(g.max_rel_diff, 1e-6);
  EXPECT_EQ(k_factor(1.0, 2.0, presets::baseline()).method, DriftFactorMethod::ClosedForm);
  EXPECT_EQ(k_factor(1.0, 2.0, presets::drift_study(1.0)).method, DriftFactorMethod::Numeric);
}

TEST(DriftFactor, ClosedFormRejectsDegenerateRates) {
  auto p = presets::baseline();
  p.beta = 2 * p.beta1;
  EXPECT_FALSE(closed_form_applicable(1.0, 2.0, p));
  EXPECT_THROW(k_sq_closed_form(1.0, 2.0, p), NumericalError);
}

TEST(DriftFactor, KTableCsv) {
  const std::vector<DriftFactorResult> rows{k_factor(1.0, 2.0, presets::baseline())};
  std::ostringstream s;
  write_k_table(s, rows);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "t,T,k_sq,method");
  EXPECT_NE(s.str().find("closed_form"), std::string::npos);
}
