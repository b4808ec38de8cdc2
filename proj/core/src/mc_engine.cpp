#include "cfsv/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <mutex>
#include <thread>

#include "cfsv/drift_factor.hpp"
#include "cfsv/error.hpp"
#include "cfsv/rng.hpp"

namespace cfsv {

namespace {

constexpr std::size_t kBlockSize = 1024;

bool same_time(double a, double b) noexcept {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

bool finite_nonneg(double x) noexcept { return std::isfinite(x) && x >= 0.0; }

}  // namespace

std::string_view to_string(DriftMode m) noexcept {
  switch (m) {
    case DriftMode::ExactPerT: return "exact_per_T";
    case DriftMode::Approximate: return "approximate";
  }
  return "unknown";
}

void validate(const McConfig& cfg) {
  if (cfg.n_paths < 1) raise(ErrorCode::InvalidConfig, "n_paths must be >= 1");
  if (cfg.n_steps < 1) raise(ErrorCode::InvalidConfig, "n_steps must be >= 1");
  if (!(std::isfinite(cfg.horizon) && cfg.horizon > 0.0))
    raise(ErrorCode::InvalidConfig, "horizon must be positive");
  if (cfg.n_steps > std::numeric_limits<std::uint32_t>::max())
    raise(ErrorCode::InvalidConfig, "n_steps too large");
  if (cfg.antithetic && cfg.n_paths % 2 != 0) raise(ErrorCode::InvalidConfig, "antithetic runs need an even path count");
  if (cfg.drift_mode == DriftMode::ExactPerT && cfg.exact_settlements.empty())
    raise(ErrorCode::InvalidConfig, "exact_per_T mode needs at least one exact settlement");
  for (double T : cfg.exact_settlements)
    if (!finite_nonneg(T)) raise(ErrorCode::InvalidConfig, "exact settlements must be finite and >= 0");
}

void evolve_step(PathState& s, const StepCoefficients& c, const std::array<double, 3>& z,
                 const ModelParams& p) noexcept {
  const double vp = std::max(s.v, 0.0);
  const double sv = std::sqrt(vp);
  s.u1 += sv * c.growth1 * c.sqrt_dt * z[0];
  s.u2 += sv * c.growth2 * c.sqrt_dt * z[1];
  s.int_w += (vp - 1.0) * c.dt;
  const std::size_t n = std::min(s.exact_drift.size(), c.sigma_f_sq.size());
  for (std::size_t k = 0; k < n; ++k) s.exact_drift[k] += vp * c.sigma_f_sq[k] * c.dt;
  s.v += p.beta * (1.0 - vp) * c.dt + p.alpha * sv * c.sqrt_dt * z[2];
  s.t += c.dt;
  ++s.node;
}

PathState evolve_step(const PathState& state, double dt, const std::array<double, 3>& z, const ModelParams& p,
                      std::span<const double> tracked_settlements) {
  if (!(dt > 0.0)) raise(ErrorCode::DomainError, "dt must be positive");
  std::vector<double> var(tracked_settlements.size());
  for (std::size_t k = 0; k < var.size(); ++k) {
    const double T = tracked_settlements[k];
    var[k] = state.t < T ? sigma_f_sq(state.t, T, p) : 0.0;
  }
  StepCoefficients c{state.t, dt, std::sqrt(dt), std::exp(p.beta1 * state.t), std::exp(p.beta2 * state.t), var};
  PathState next = state;
  next.exact_drift.resize(tracked_settlements.size(), 0.0);
  evolve_step(next, c, z, p);
  return next;
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t n_steps, std::span<const double> required) {
  if (!(horizon > 0.0) || n_steps < 1) raise(ErrorCode::InvalidConfig, "time grid needs horizon > 0 and n_steps >= 1");
  TimeGrid g;
  g.times.reserve(n_steps + 1 + required.size());
  for (std::size_t i = 0; i <= n_steps; ++i)
    g.times.push_back(i == n_steps ? horizon : horizon * static_cast<double>(i) / static_cast<double>(n_steps));
  for (double t : required) {
    if (!(t >= 0.0 && (t <= horizon || same_time(t, horizon))))
      raise(ErrorCode::InvalidConfig, "required time outside [0, horizon]");
    const auto it = std::lower_bound(g.times.begin(), g.times.end(), t);
    if (it != g.times.end() && same_time(*it, t)) continue;
    if (it != g.times.begin() && same_time(*std::prev(it), t)) continue;
    g.times.insert(it, t);
  }
  return g;
}

std::size_t TimeGrid::node_of(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it != times.end() && same_time(*it, t)) return static_cast<std::size_t>(it - times.begin());
  if (it != times.begin() && same_time(*std::prev(it), t))
    return static_cast<std::size_t>(std::prev(it) - times.begin());
  raise(ErrorCode::DomainError, "time is not a grid node");
}

std::array<double, 2> factor_loadings(double T, const ModelParams& p) noexcept {
  return {p.sigma * std::exp(-p.beta1 * T), p.sigma * p.R * std::exp(-p.beta2 * T)};
}

SimulationContext::SimulationContext(const ModelParams& p, const MarketCurves& curves, TimeGrid grid,
                                     std::vector<double> tracked)
    : params_(validated(p)), curves_(curves), grid_(std::move(grid)), tracked_(std::move(tracked)) {
  if (grid_.times.size() < 2) raise(ErrorCode::InvalidConfig, "time grid needs at least one step");
  const std::size_t n = grid_.steps();
  const std::size_t m = tracked_.size();
  growth1_.resize(n);
  growth2_.resize(n);
  sqrt_dt_.resize(n);
  sigma_f_sq_.assign(n * m, 0.0);
  exp_sums_.assign(n + 1, {0.0, 0.0, 0.0});
  const double c[3] = {2 * p.beta1, 2 * p.beta2, p.beta1 + p.beta2};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid_.times[i];
    const double dt = grid_.times[i + 1] - t;
    if (!(dt > 0.0)) raise(ErrorCode::InvalidConfig, "time grid must be strictly increasing");
    growth1_[i] = std::exp(p.beta1 * t);
    growth2_[i] = std::exp(p.beta2 * t);
    sqrt_dt_[i] = std::sqrt(dt);
    for (std::size_t k = 0; k < m; ++k)
      sigma_f_sq_[i * m + k] = t < tracked_[k] ? sigma_f_sq(t, tracked_[k], p) : 0.0;
    for (int j = 0; j < 3; ++j) exp_sums_[i + 1][j] = exp_sums_[i][j] + std::exp(c[j] * t) * dt;
  }
}

StepCoefficients SimulationContext::step(std::size_t n) const noexcept {
  const std::size_t m = tracked_.size();
  return {grid_.times[n],
          grid_.times[n + 1] - grid_.times[n],
          sqrt_dt_[n],
          growth1_[n],
          growth2_[n],
          std::span<const double>(sigma_f_sq_.data() + n * m, m)};
}

double SimulationContext::deterministic_drift(std::size_t node, double T) const {
  if (node >= exp_sums_.size()) raise(ErrorCode::DomainError, "node outside the time grid");
  if (T < grid_.times[node] && !same_time(T, grid_.times[node]))
    raise(ErrorCode::DomainError, "settlement before observation time");
  const auto& p = params_;
  const auto& g = exp_sums_[node];
  const double s2 = p.sigma * p.sigma;
  return s2 * (std::exp(-2 * p.beta1 * T) * g[0] + p.R * p.R * std::exp(-2 * p.beta2 * T) * g[1] +
               2 * p.rho * p.R * std::exp(-(p.beta1 + p.beta2) * T) * g[2]);
}

double SimulationContext::drift_factor(std::size_t node, double T) const {
  if (const auto it = k_table_.find({node, T}); it != k_table_.end()) return it->second;
  return k_factor(grid_.times.at(node), T, params_).k();
}

void SimulationContext::precompute_drift_factor(std::size_t node, double T) {
  if (k_table_.contains({node, T})) return;
  k_table_[{node, T}] = k_factor(grid_.times.at(node), T, params_).k();
}

std::size_t SimulationContext::tracked_index(double T) const noexcept {
  for (std::size_t k = 0; k < tracked_.size(); ++k)
    if (same_time(tracked_[k], T)) return k;
  return npos;
}

PathState SimulationContext::initial_state() const {
  PathState s;
  s.exact_drift.assign(tracked_.size(), 0.0);
  return s;
}

double forward_reconstruct(const PathState& state, double T, const SimulationContext& ctx, DriftMode mode) {
  if (T < state.t && !same_time(T, state.t)) raise(ErrorCode::DomainError, "settlement before observation time");
  double drift;
  if (mode == DriftMode::ExactPerT) {
    const std::size_t k = ctx.tracked_index(T);
    if (k == SimulationContext::npos || k >= state.exact_drift.size())
      raise(ErrorCode::MissingSettlement, "settlement is not tracked in exact mode");
    drift = state.exact_drift[k];
  } else {
    drift = ctx.deterministic_drift(state.node, T) + ctx.drift_factor(state.node, T) * state.int_w;
  }
  const auto a = factor_loadings(T, ctx.params());
  return ctx.curves().forward(T) * std::exp(-0.5 * drift + a[0] * state.u1 + a[1] * state.u2);
}

PayoffSpec PayoffSpec::forward(double t_e, double T) {
  PayoffSpec s;
  s.kind = PayoffKind::Forward;
  s.t_e = t_e;
  s.T = T;
  return s;
}

PayoffSpec PayoffSpec::vanilla(double strike, double T, OptionKind option) {
  PayoffSpec s;
  s.kind = PayoffKind::Vanilla;
  s.option = option;
  s.strike = strike;
  s.t_e = T;
  s.T = T;
  return s;
}

PayoffSpec PayoffSpec::early_exercise(double strike, double t_e, double T, OptionKind option) {
  PayoffSpec s;
  s.kind = PayoffKind::EarlyExercise;
  s.option = option;
  s.strike = strike;
  s.t_e = t_e;
  s.T = T;
  return s;
}

PayoffSpec PayoffSpec::asian_prompt(double strike, std::vector<Fixing> fixings, OptionKind option) {
  PayoffSpec s;
  s.kind = PayoffKind::AsianPrompt;
  s.option = option;
  s.strike = strike;
  s.fixings = std::move(fixings);
  if (!s.fixings.empty()) {
    s.t_e = s.fixings.back().t;
    s.T = s.fixings.back().T;
  }
  return s;
}

std::vector<Fixing> PayoffSpec::observations() const {
  if (kind == PayoffKind::AsianPrompt) return fixings;
  return {Fixing{t_e, T}};
}

double PayoffSpec::payment_time() const {
  if (kind == PayoffKind::AsianPrompt) {
    double last = 0.0;
    for (const auto& f : fixings) last = std::max(last, f.T);
    return last;
  }
  return T;
}

void validate(const PayoffSpec& s) {
  if (!finite_nonneg(s.strike)) raise(ErrorCode::DomainError, "strike must be finite and >= 0");
  if (s.kind == PayoffKind::AsianPrompt) {
    if (s.fixings.empty()) raise(ErrorCode::DomainError, "asian payoff needs at least one fixing");
    double prev = -1.0;
    for (const auto& f : s.fixings) {
      if (!finite_nonneg(f.t) || !std::isfinite(f.T)) raise(ErrorCode::DomainError, "fixing times must be finite");
      if (f.t < prev) raise(ErrorCode::DomainError, "fixing times must be ascending");
      if (f.T < f.t) raise(ErrorCode::DomainError, "fixing settlement precedes fixing time");
      prev = f.t;
    }
    return;
  }
  if (!finite_nonneg(s.t_e) || !std::isfinite(s.T)) raise(ErrorCode::DomainError, "expiry must be finite and >= 0");
  if (s.T < s.t_e) raise(ErrorCode::DomainError, "settlement precedes expiry");
  if (s.kind == PayoffKind::Vanilla && !same_time(s.t_e, s.T))
    raise(ErrorCode::DomainError, "vanilla options expire at settlement");
}

std::vector<Fixing> prompt_fixings(double first, double last, std::size_t n, double contract_period) {
  if (n < 1 || !(first >= 0.0) || !(last >= first) || !(contract_period > 0.0))
    raise(ErrorCode::DomainError, "invalid fixing schedule");
  std::vector<Fixing> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? last : first + (last - first) * static_cast<double>(i) / static_cast<double>(n - 1);
    double T = std::ceil(t / contract_period - 1e-12) * contract_period;
    if (T < t) T = t;
    out.push_back({t, T});
  }
  return out;
}

McMoments::McMoments(std::size_t dims) : mean_(dims, 0.0), comoment_(dims * dims, 0.0) {}

void McMoments::add(std::span<const double> x) {
  if (x.size() != mean_.size()) raise(ErrorCode::DomainError, "moment dimension mismatch");
  ++n_;
  const std::size_t d = mean_.size();
  const double inv = 1.0 / static_cast<double>(n_);
  std::vector<double> delta(d);
  for (std::size_t i = 0; i < d; ++i) {
    delta[i] = x[i] - mean_[i];
    mean_[i] += delta[i] * inv;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) comoment_[i * d + j] += delta[i] * (x[j] - mean_[j]);
}

void McMoments::merge(const McMoments& o) {
  if (o.n_ == 0) return;
  if (o.mean_.size() != mean_.size()) raise(ErrorCode::DomainError, "moment dimension mismatch");
  if (n_ == 0) {
    *this = o;
    return;
  }
  const std::size_t d = mean_.size();
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double n = na + nb;
  std::vector<double> delta(d);
  for (std::size_t i = 0; i < d; ++i) delta[i] = o.mean_[i] - mean_[i];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      comoment_[i * d + j] += o.comoment_[i * d + j] + delta[i] * delta[j] * na * nb / n;
  for (std::size_t i = 0; i < d; ++i) mean_[i] += delta[i] * nb / n;
  n_ += o.n_;
}

double McMoments::covariance(std::size_t i, std::size_t j) const {
  const std::size_t d = mean_.size();
  if (i >= d || j >= d) raise(ErrorCode::DomainError, "moment index out of range");
  if (n_ < 2) return 0.0;
  return comoment_[i * d + j] / static_cast<double>(n_ - 1);
}

double McMoments::std_error(std::size_t i) const {
  if (n_ == 0) return 0.0;
  return std::sqrt(std::max(covariance(i, i), 0.0) / static_cast<double>(n_));
}

namespace {

struct Observation {
  std::size_t node;
  double T;
  double F0;
  std::array<double, 2> loading;
  std::size_t tracked;    // index into exact accumulators
  double det_drift = 0.0;  // approximate mode
  double k = 0.0;
};

}  // namespace

McMoments simulate(const McConfig& cfg, const MarketCurves& curves, const ModelParams& p,
                   std::span<const Fixing> observations, ModeSelection modes, std::size_t n_outputs,
                   const PathFunctional& functional) {
  McConfig checked = cfg;
  checked.drift_mode = DriftMode::Approximate;  // settlements are derived below
  validate(checked);
  validated(p);
  if (!modes.exact && !modes.approximate) raise(ErrorCode::InvalidConfig, "no drift mode selected");
  if (!functional) raise(ErrorCode::InvalidConfig, "missing path functional");

  std::vector<double> times, tracked;
  for (const auto& f : observations) {
    if (!finite_nonneg(f.t) || !(f.T >= f.t)) raise(ErrorCode::DomainError, "observation needs 0 <= t <= T");
    if (f.t > cfg.horizon && !same_time(f.t, cfg.horizon))
      raise(ErrorCode::InvalidConfig, "observation time beyond the simulation horizon");
    times.push_back(std::min(f.t, cfg.horizon));
    if (modes.exact && std::none_of(tracked.begin(), tracked.end(), [&](double x) { return same_time(x, f.T); }))
      tracked.push_back(f.T);
  }
  std::sort(times.begin(), times.end());

  SimulationContext ctx(p, curves, TimeGrid::uniform(cfg.horizon, cfg.n_steps, times), tracked);

  std::vector<Observation> obs;
  obs.reserve(observations.size());
  for (const auto& f : observations) {
    Observation o{ctx.grid().node_of(std::min(f.t, cfg.horizon)), f.T, curves.forward(f.T), factor_loadings(f.T, p),
                  ctx.tracked_index(f.T)};
    if (modes.approximate) {
      ctx.precompute_drift_factor(o.node, f.T);
      o.det_drift = ctx.deterministic_drift(o.node, f.T);
      o.k = ctx.drift_factor(o.node, f.T);
    }
    obs.push_back(o);
  }
  // Visit observations in node order while reporting them in input order.
  std::vector<std::size_t> order(obs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return obs[a].node < obs[b].node; });

  const auto chol = factorize_correlation(p);
  const std::size_t n_steps = ctx.grid().steps();
  const std::size_t n_blocks = (cfg.n_paths + kBlockSize - 1) / kBlockSize;
  std::vector<McMoments> block_moments(n_blocks, McMoments(n_outputs));

  auto run_block = [&](std::size_t b) {
    McMoments acc(n_outputs);
    std::vector<double> exact(modes.exact ? obs.size() : 0), approx(modes.approximate ? obs.size() : 0);
    std::vector<double> out(n_outputs), pair(n_outputs);
    PathState s = ctx.initial_state();
    const std::size_t first = b * kBlockSize;
    const std::size_t last = std::min(cfg.n_paths, first + kBlockSize);
    for (std::size_t path = first; path < last; ++path) {
      const std::uint64_t stream = cfg.antithetic ? path / 2 : path;
      const double sign = cfg.antithetic && (path & 1u) ? -1.0 : 1.0;
      const PathNormals normals(cfg.seed, stream);
      s.node = 0;
      s.t = 0.0;
      s.u1 = s.u2 = s.int_w = 0.0;
      s.v = ModelParams::v0;
      std::fill(s.exact_drift.begin(), s.exact_drift.end(), 0.0);

      std::size_t next = 0;
      auto observe = [&] {
        while (next < order.size() && obs[order[next]].node == s.node) {
          const std::size_t i = order[next++];
          const auto& o = obs[i];
          const double diffusion = o.loading[0] * s.u1 + o.loading[1] * s.u2;
          if (modes.exact) exact[i] = o.F0 * std::exp(-0.5 * s.exact_drift[o.tracked] + diffusion);
          if (modes.approximate) approx[i] = o.F0 * std::exp(-0.5 * (o.det_drift + o.k * s.int_w) + diffusion);
        }
      };
      observe();
      for (std::size_t n = 0; n < n_steps && next < order.size(); ++n) {
        const auto u = normals.draw(static_cast<std::uint32_t>(n));
        const auto z = chol.apply({sign * u[0], sign * u[1], sign * u[2]});
        evolve_step(s, ctx.step(n), z, p);
        observe();
      }
      functional(PathForwards{exact, approx}, out);
      if (!cfg.antithetic) {
        acc.add(out);
      } else if (path % 2 == 0) {
        pair = out;
      } else {
        for (std::size_t i = 0; i < n_outputs; ++i) pair[i] = 0.5 * (pair[i] + out[i]);
        acc.add(pair);
      }
    }
    block_moments[b] = std::move(acc);
  };

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next_block{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b; (b = next_block.fetch_add(1)) < n_blocks;) {
          try {
            run_block(b);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  McMoments total(n_outputs);
  for (const auto& m : block_moments) total.merge(m);
  return total;
}

McEstimate price_payoff(const PayoffSpec& payoff, const McConfig& cfg, const MarketCurves& curves,
                        const ModelParams& p) {
  validate(cfg);
  validate(payoff);
  const auto observations = payoff.observations();
  const bool exact = cfg.drift_mode == DriftMode::ExactPerT;
  if (exact) {
    for (const auto& f : observations) {
      const bool tracked = std::any_of(cfg.exact_settlements.begin(), cfg.exact_settlements.end(),
                                       [&](double T) { return same_time(T, f.T); });
      if (!tracked) raise(ErrorCode::MissingSettlement, "payoff settlement is not among the exact settlements");
    }
  }
  const double D = payoff.kind == PayoffKind::Forward ? 1.0 : curves.discount(payoff.payment_time());
  const double K = payoff.strike;
  const double phi = payoff.option == OptionKind::Call ? 1.0 : -1.0;
  const PayoffKind kind = payoff.kind;

  const auto moments = simulate(cfg, curves, p, observations, ModeSelection{exact, !exact}, 1,
                                [&](const PathForwards& f, std::span<double> out) {
                                  const auto& F = exact ? f.exact : f.approximate;
                                  double x = 0.0;
                                  for (double v : F) x += v;
                                  x /= static_cast<double>(F.size());
                                  out[0] = kind == PayoffKind::Forward ? x : D * std::max(phi * (x - K), 0.0);
                                });
  return {moments.mean(0), moments.std_error(0), cfg.n_paths};
}

std::vector<DriftStudyRow> drift_error_study(std::span<const double> alphas, const McConfig& cfg,
                                             const MarketCurves& curves, const ModelParams& p_base,
                                             const DriftStudySpec& spec) {
  if (!(spec.t_e > 0.0) || !(spec.T >= spec.t_e) || !(spec.otm_moneyness > 0.0))
    raise(ErrorCode::InvalidConfig, "invalid drift study spec");
  McConfig run = cfg;
  run.horizon = spec.t_e;
  const double F0 = curves.forward(spec.T);
  const double K_atm = F0;
  const double K_otm = spec.otm_moneyness * F0;
  const Fixing fixing{spec.t_e, spec.T};

  // Outputs: Fe, Fa, Ce(atm), Ca(atm), Ce(otm), Ca(otm). Prices are undiscounted.
  enum { kFe, kFa, kCeAtm, kCaAtm, kCeOtm, kCaOtm, kOutputs };

  std::vector<DriftStudyRow> rows;
  for (double alpha : alphas) {
    ModelParams p = p_base;
    p.alpha = alpha;
    const auto m = simulate(run, curves, p, std::span<const Fixing>(&fixing, 1), ModeSelection{true, true}, kOutputs,
                            [&](const PathForwards& f, std::span<double> out) {
                              const double fe = f.exact[0], fa = f.approximate[0];
                              out[kFe] = fe;
                              out[kFa] = fa;
                              out[kCeAtm] = std::max(fe - K_atm, 0.0);
                              out[kCaAtm] = std::max(fa - K_atm, 0.0);
                              out[kCeOtm] = std::max(fe - K_otm, 0.0);
                              out[kCaOtm] = std::max(fa - K_otm, 0.0);
                            });
    const double n = static_cast<double>(m.count());

    // Implied vol from the mode's own forward; stderr by the delta method on C - delta F.
    auto vol_of = [&](int ci, int fi, double K, double* stderr_pct) {
      const double F = m.mean(fi);
      const double iv = implied_vol(m.mean(ci), F, K, spec.t_e, 1.0, OptionKind::Call);
      if (stderr_pct) {
        const double vega = black76_vega(F, K, iv, spec.t_e, 1.0);
        const double delta = black76_delta(F, K, iv, spec.t_e, 1.0, OptionKind::Call);
        const double var = m.covariance(ci, ci) - 2 * delta * m.covariance(ci, fi) + delta * delta * m.covariance(fi, fi);
        *stderr_pct = vega > 0.0 ? std::sqrt(std::max(var, 0.0) / n) / vega * 100.0 : 0.0;
      }
      return iv;
    };

    DriftStudyRow r;
    r.alpha = alpha;
    r.fwd_err_bp = (m.mean(kFa) - m.mean(kFe)) / F0 * 1e4;
    r.fwd_stderr_bp = m.std_error(kFe) / F0 * 1e4;
    const double atm_e = vol_of(kCeAtm, kFe, K_atm, &r.atm_vol_stderr_pct);
    const double atm_a = vol_of(kCaAtm, kFa, K_atm, nullptr);
    const double otm_e = vol_of(kCeOtm, kFe, K_otm, &r.otm_vol_stderr_pct);
    const double otm_a = vol_of(kCaOtm, kFa, K_otm, nullptr);
    r.atm_vol_err_pct = (atm_a - atm_e) * 100.0;
    r.otm_vol_err_pct = (otm_a - otm_e) * 100.0;
    r.atm_vol_exact = atm_e;
    r.otm_vol_exact = otm_e;
    rows.push_back(r);
  }
  return rows;
}

void write_csv(std::ostream& out, std::span<const DriftStudyRow> rows) {
  out << "alpha,fwd_err_bp,fwd_stderr_bp,atm_vol_err_pct,atm_vol_stderr_pct,otm_vol_err_pct,otm_vol_stderr_pct\n";
  const auto old = out.precision(17);
  for (const auto& r : rows)
    out << r.alpha << ',' << r.fwd_err_bp << ',' << r.fwd_stderr_bp << ',' << r.atm_vol_err_pct << ','
        << r.atm_vol_stderr_pct << ',' << r.otm_vol_err_pct << ',' << r.otm_vol_stderr_pct << '\n';
  out.precision(old);
}

}  // namespace cfsv
