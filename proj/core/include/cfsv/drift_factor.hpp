#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cfsv/model.hpp"

namespace cfsv {

// The stochastic part of the integrated drift, int_0^t w(s) sigma_F^2(s,T) ds
// with w = v - 1, is replaced by k(t,T) int_0^t w(s) ds, where k^2 matches the
// two variances:
//
//   k^2 = [int int_{s1<s2} sF2(s1) sF2(s2) J(s1,s2)] / [int int_{s1<s2} J(s1,s2)]
//
// and J(s1,s2) = E[w(s1) w(s2)] is the Heston autocovariance.

enum class DriftFactorMethod { Numeric, ClosedForm, DegenerateLimit };

std::string_view to_string(DriftFactorMethod m) noexcept;

struct DriftFactorResult {
  double k_sq = 0.0;
  DriftFactorMethod method = DriftFactorMethod::Numeric;
  double t = 0.0;
  double T = 0.0;

  double k() const noexcept;
};

/// E[w(s1) w(s2)]; the beta -> 0 limit is alpha^2 min(s1, s2).
double cov_w(double s1, double s2, double beta, double alpha);

struct NumericDriftOptions {
  std::size_t nodes = 64;       ///< per dimension, doubled until converged
  double rel_tolerance = 1e-8;  ///< on k^2 between successive doublings
  std::size_t max_nodes = 1024;
};

/// Nested Gauss-Legendre evaluation of the variance-matching ratio.
/// Throws DegenerateDenominator when alpha == 0 or t == 0.
DriftFactorResult k_sq_numeric(double t, double T, const ModelParams& p,
                               const NumericDriftOptions& opts = {});

/// Closed-form k^2. Throws DegenerateParameters when beta, beta1, beta2 or
/// any of the rate combinations in the denominators is too close to zero.
DriftFactorResult k_sq_closed_form(double t, double T, const ModelParams& p);

/// True when the closed form's guards accept (t, T, p).
bool closed_form_applicable(double t, double T, const ModelParams& p) noexcept;

struct ClosedFormCheck {
  bool passed = false;
  std::size_t samples = 0;
  std::size_t evaluated = 0;
  double max_rel_diff = 0.0;
};

/// Compares closed form with the numeric ratio on `samples` seeded random
/// nondegenerate tuples. Used as the gate for the closed-form fast path.
ClosedFormCheck verify_closed_form(std::size_t samples = 50, std::uint64_t seed = 20240611,
                                   double rel_tolerance = 1e-6);

/// Process-wide gate, evaluated once.
const ClosedFormCheck& closed_form_gate();

/// Value used when the ratio is undefined (alpha == 0 or t == 0): the
/// time-average of sigma_F^2 on [0, t], or sigma_F^2(0, T) at t == 0.
DriftFactorResult k_sq_degenerate_limit(double t, double T, const ModelParams& p);

/// Dispatcher: degenerate limit, else closed form when applicable and the
/// gate passed, else numeric.
DriftFactorResult k_factor(double t, double T, const ModelParams& p);

/// CSV with header `t,T,k_sq,method`.
void write_k_table(std::ostream& out, std::span<const DriftFactorResult> rows);

}  // namespace cfsv
