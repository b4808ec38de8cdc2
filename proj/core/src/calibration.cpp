#include "cfsv/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cfsv/black76.hpp"
#include "cfsv/error.hpp"

namespace cfsv {

namespace {

constexpr double kLogFloor = 1e-10;
constexpr std::size_t kDims = 9;

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

double safe_atanh(double x) {
  const double lim = 1.0 - 1e-12;
  return std::atanh(std::clamp(x, -lim, lim));
}

}  // namespace

void validate(const VolQuote& q) {
  if (!(q.t_e > 0.0) || !(q.t_e <= q.T) || !std::isfinite(q.T))
    raise(ErrorCode::DomainError, "quote needs 0 < t_e <= T");
  if (!(q.strike > 0.0) || !std::isfinite(q.strike)) raise(ErrorCode::DomainError, "quote strike must be > 0");
  if (!(q.market_vol > 0.0) || !std::isfinite(q.market_vol)) raise(ErrorCode::DomainError, "market vol must be > 0");
  if (!(q.weight >= 0.0) || !std::isfinite(q.weight)) raise(ErrorCode::DomainError, "quote weight must be >= 0");
}

double objective(const ModelParams& p, std::span<const VolQuote> quotes, const MarketCurves& curves,
                 const QuadratureConfig& q) {
  if (quotes.empty()) raise(ErrorCode::DomainError, "objective needs at least one quote");
  for (const auto& quote : quotes) validate(quote);

  std::map<std::pair<double, double>, std::vector<const VolQuote*>> groups;
  for (const auto& quote : quotes)
    if (quote.weight > 0.0) groups[{quote.t_e, quote.T}].push_back(&quote);

  const bool valid = validate_params(p).ok();
  double sse = 0.0;
  for (const auto& [key, members] : groups) {
    if (!valid) {
      sse += kFailedQuotePenalty * static_cast<double>(members.size());
      continue;
    }
    try {
      const FourierSlice slice(key.first, key.second, p, q);
      const double F = curves.forward(key.second);
      const double D = curves.discount(key.second);
      for (const VolQuote* m : members) {
        try {
          const double price = slice.call(F, m->strike, D);
          const double vol = implied_vol(price, F, m->strike, m->t_e, D, OptionKind::Call);
          const double diff = vol - m->market_vol;
          sse += m->weight * diff * diff;
        } catch (const Error&) {
          sse += kFailedQuotePenalty;
        }
      }
    } catch (const Error&) {
      sse += kFailedQuotePenalty * static_cast<double>(members.size());
    }
  }
  return sse;
}

ParamBounds ParamBounds::defaults() {
  ParamBounds b;
  b.lower = {1e-4, 1e-6, 1e-6, -10.0, -0.999, 0.0, 0.0, -0.999, -0.999};
  b.upper = {5.0, 50.0, 50.0, 10.0, 0.999, 50.0, 10.0, 0.999, 0.999};
  return b;
}

void validate(const ParamBounds& b) {
  const double l[kDims] = {b.lower.sigma, b.lower.beta1, b.lower.beta2, b.lower.R, b.lower.rho,
                           b.lower.beta,  b.lower.alpha, b.lower.rho1,  b.lower.rho2};
  const double u[kDims] = {b.upper.sigma, b.upper.beta1, b.upper.beta2, b.upper.R, b.upper.rho,
                           b.upper.beta,  b.upper.alpha, b.upper.rho1,  b.upper.rho2};
  for (std::size_t i = 0; i < kDims; ++i)
    if (!(l[i] <= u[i]) || !std::isfinite(l[i]) || !std::isfinite(u[i]))
      raise(ErrorCode::InvalidConfig, "parameter bounds must be finite with lower <= upper");
  if (!(b.lower.sigma > 0.0)) raise(ErrorCode::InvalidConfig, "sigma lower bound must be > 0");
  if (b.lower.beta1 < 0.0 || b.lower.beta2 < 0.0 || b.lower.beta < 0.0 || b.lower.alpha < 0.0)
    raise(ErrorCode::InvalidConfig, "rate and vol-of-vol bounds must be >= 0");
  for (double r : {b.lower.rho, b.lower.rho1, b.lower.rho2, b.upper.rho, b.upper.rho1, b.upper.rho2})
    if (std::abs(r) > 1.0) raise(ErrorCode::InvalidConfig, "correlation bounds must lie in [-1, 1]");
}

std::vector<double> to_unconstrained(const ModelParams& p) {
  return {safe_log(p.sigma), safe_log(p.beta1), safe_log(p.beta2), p.R,          safe_atanh(p.rho),
          safe_log(p.beta),  safe_log(p.alpha), safe_atanh(p.rho1), safe_atanh(p.rho2)};
}

ModelParams from_unconstrained(std::span<const double> x, const ParamBounds& b) {
  if (x.size() != kDims) raise(ErrorCode::DomainError, "expected 9 unconstrained coordinates");
  auto pos = [](double y, double lo, double hi) {
    const double v = std::exp(y);
    return std::clamp(v <= kLogFloor ? 0.0 : v, lo, hi);
  };
  ModelParams p;
  p.sigma = pos(x[0], b.lower.sigma, b.upper.sigma);
  p.beta1 = pos(x[1], b.lower.beta1, b.upper.beta1);
  p.beta2 = pos(x[2], b.lower.beta2, b.upper.beta2);
  p.R = std::clamp(x[3], b.lower.R, b.upper.R);
  p.rho = std::clamp(std::tanh(x[4]), b.lower.rho, b.upper.rho);
  p.beta = pos(x[5], b.lower.beta, b.upper.beta);
  p.alpha = pos(x[6], b.lower.alpha, b.upper.alpha);
  p.rho1 = std::clamp(std::tanh(x[7]), b.lower.rho1, b.upper.rho1);
  p.rho2 = std::clamp(std::tanh(x[8]), b.lower.rho2, b.upper.rho2);
  if (min_correlation_eigenvalue(p) < -kPsdTolerance) p = repair_correlations(p);
  return p;
}

std::string_view to_string(FitStatus s) noexcept {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

CalibrationResult fit(std::span<const VolQuote> quotes, const MarketCurves& curves, const ModelParams& initial,
                      const ParamBounds& bounds, const FitOptions& opt) {
  validated(initial);
  validate(bounds);
  validate(opt.quadrature);
  if (quotes.empty()) raise(ErrorCode::DomainError, "fit needs at least one quote");
  for (const auto& q : quotes) validate(q);
  if (opt.budget < 1) raise(ErrorCode::InvalidConfig, "budget must be >= 1");
  if (!(opt.initial_step > 0.0) || !(opt.penalty_weight >= 0.0))
    raise(ErrorCode::InvalidConfig, "initial_step must be > 0 and penalty_weight >= 0");

  const std::vector<double> x0 = to_unconstrained(initial);

  CalibrationResult best;
  best.params = initial;
  best.objective = std::numeric_limits<double>::infinity();
  double best_penalized = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;

  struct Vertex {
    std::vector<double> x;
    double f;
  };

  // The initial point is evaluated as given; every other vertex goes through the transform.
  auto evaluate_params = [&](const ModelParams& p, std::span<const double> x) {
    ++evals;
    const double raw = objective(p, quotes, curves, opt.quadrature);
    double pen = 0.0;
    for (std::size_t i = 0; i < kDims; ++i) pen += (x[i] - x0[i]) * (x[i] - x0[i]);
    const double f = raw + opt.penalty_weight * pen;
    if (f < best_penalized) {
      best_penalized = f;
      best.params = p;
      best.objective = raw;
    }
    return f;
  };
  auto evaluate = [&](std::span<const double> x) { return evaluate_params(from_unconstrained(x, bounds), x); };
  auto done = [&] { return best.objective <= opt.objective_target; };
  auto finish = [&](bool converged) {
    best.n_evals = evals;
    best.converged = converged;
    best.status = converged ? FitStatus::Converged : FitStatus::BudgetExhausted;
    return best;
  };

  std::vector<Vertex> simplex;
  simplex.push_back({x0, evaluate_params(initial, x0)});
  if (done()) return finish(true);
  for (std::size_t i = 0; i < kDims; ++i) {
    if (evals >= opt.budget) return finish(false);
    auto x = x0;
    x[i] += opt.initial_step;
    simplex.push_back({x, evaluate(x)});
    if (done()) return finish(true);
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  auto blend = [](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] + t * (w[i] - c[i]);
    return out;
  };

  while (true) {
    order();
    const double spread = simplex.back().f - simplex.front().f;
    double size = 0.0;
    for (std::size_t v = 1; v < simplex.size(); ++v)
      for (std::size_t i = 0; i < kDims; ++i)
        size = std::max(size, std::abs(simplex[v].x[i] - simplex.front().x[i]));
    if (spread <= opt.f_tolerance && size <= opt.x_tolerance) return finish(true);
    if (evals >= opt.budget) return finish(false);

    std::vector<double> centroid(kDims, 0.0);
    for (std::size_t v = 0; v + 1 < simplex.size(); ++v)
      for (std::size_t i = 0; i < kDims; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(kDims);
    Vertex& worst = simplex.back();
    const double f_second = simplex[simplex.size() - 2].f;

    const auto xr = blend(centroid, worst.x, -kReflect);
    const double fr = evaluate(xr);
    if (done()) return finish(true);
    if (fr < simplex.front().f) {
      if (evals >= opt.budget) {
        worst = {xr, fr};
        return finish(false);
      }
      const auto xe = blend(centroid, worst.x, -kExpand);
      const double fe = evaluate(xe);
      worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      if (done()) return finish(true);
      continue;
    }
    if (fr < f_second) {
      worst = {xr, fr};
      continue;
    }
    if (evals >= opt.budget) return finish(false);
    const bool outside = fr < worst.f;
    const auto xc = outside ? blend(centroid, xr, kContract) : blend(centroid, worst.x, kContract);
    const double fc = evaluate(xc);
    if (done()) return finish(true);
    if (fc < std::min(fr, worst.f)) {
      worst = {xc, fc};
      continue;
    }
    for (std::size_t v = 1; v < simplex.size(); ++v) {
      if (evals >= opt.budget) return finish(false);
      simplex[v].x = blend(simplex.front().x, simplex[v].x, kShrink);
      simplex[v].f = evaluate(simplex[v].x);
      if (done()) return finish(true);
    }
  }
}

}  // namespace cfsv
