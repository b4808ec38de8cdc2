#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "cfsv/black76.hpp"
#include "cfsv/curves.hpp"
#include "cfsv/model.hpp"

namespace cfsv {

/// How a path turns factor state into F(t, T).
///  - ExactPerT carries int v(s) sigma_F^2(s,T) ds per tracked settlement.
///  - Approximate replaces it by its deterministic part plus k(t,T) int w ds.
enum class DriftMode { ExactPerT, Approximate };

std::string_view to_string(DriftMode m) noexcept;

struct McConfig {
  std::size_t n_paths = 100'000;
  std::size_t n_steps = 100;
  double horizon = 1.0;
  std::uint64_t seed = 42;
  DriftMode drift_mode = DriftMode::ExactPerT;
  std::vector<double> exact_settlements;
  bool antithetic = false;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

void validate(const McConfig& cfg);

/// Factor state of one path at a grid node.
struct PathState {
  std::size_t node = 0;
  double t = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double v = ModelParams::v0;  ///< signed full-truncation state; max(v,0) is used
  double int_w = 0.0;          ///< int_0^t (v - 1) ds
  std::vector<double> exact_drift;  ///< aligned with the tracked settlements
};

/// Time-grid quantities shared by every path for the step [t, t + dt].
struct StepCoefficients {
  double t = 0.0;
  double dt = 0.0;
  double sqrt_dt = 0.0;
  double growth1 = 1.0;  ///< e^{beta1 t}
  double growth2 = 1.0;  ///< e^{beta2 t}
  std::span<const double> sigma_f_sq;  ///< sigma_F^2(t, T_k) per tracked T_k (0 once t >= T_k)
};

/// One full-truncation Euler step driven by correlated normals (z1, z2, z3).
void evolve_step(PathState& state, const StepCoefficients& step, const std::array<double, 3>& z,
                 const ModelParams& p) noexcept;

/// Convenience overload computing the coefficients for a single step.
PathState evolve_step(const PathState& state, double dt, const std::array<double, 3>& z,
                      const ModelParams& p, std::span<const double> tracked_settlements = {});

/// Uniform grid on [0, horizon] with any required times inserted.
struct TimeGrid {
  std::vector<double> times;

  static TimeGrid uniform(double horizon, std::size_t n_steps, std::span<const double> required = {});
  std::size_t steps() const noexcept { return times.size() - 1; }
  /// Node index of t; throws DomainError if t is not a node.
  std::size_t node_of(double t) const;
};

/// sigma e^{-beta1 T} and sigma R e^{-beta2 T}: weights of u1, u2 in x(t, T).
std::array<double, 2> factor_loadings(double T, const ModelParams& p) noexcept;

/// Path-independent data for a simulation: grid, step coefficients, the
/// deterministic drift sums and the k(t,T) table.
class SimulationContext {
 public:
  SimulationContext(const ModelParams& p, const MarketCurves& curves, TimeGrid grid,
                    std::vector<double> tracked_settlements = {});

  const ModelParams& params() const noexcept { return params_; }
  const MarketCurves& curves() const noexcept { return curves_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> tracked_settlements() const noexcept { return tracked_; }
  StepCoefficients step(std::size_t n) const noexcept;

  /// Left-point sum of sigma_F^2(t_j, T) dt_j over nodes before `node`.
  double deterministic_drift(std::size_t node, double T) const;

  /// k(t_node, T); memoized entries are read, others computed on demand.
  double drift_factor(std::size_t node, double T) const;
  void precompute_drift_factor(std::size_t node, double T);

  /// Index of T among tracked settlements, or npos.
  std::size_t tracked_index(double T) const noexcept;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  PathState initial_state() const;

 private:
  ModelParams params_;
  MarketCurves curves_;
  TimeGrid grid_;
  std::vector<double> tracked_;
  std::vector<double> growth1_, growth2_, sqrt_dt_;
  std::vector<double> sigma_f_sq_;  // steps x tracked
  // Cumulative sums of e^{c t_j} dt_j for c = 2 beta1, 2 beta2, beta1 + beta2.
  std::vector<std::array<double, 3>> exp_sums_;
  std::map<std::pair<std::size_t, double>, double> k_table_;
};

/// F(t, T) = F(0,T) exp(-I/2 + sigma(e^{-beta1 T} u1 + R e^{-beta2 T} u2)).
/// Throws MissingSettlement in exact mode when T is not tracked.
double forward_reconstruct(const PathState& state, double T, const SimulationContext& ctx, DriftMode mode);

/// Forward observation (fixing time t, settlement T).
struct Fixing {
  double t;
  double T;
};

enum class PayoffKind { Forward, Vanilla, EarlyExercise, AsianPrompt };

/// Forward: E[F(t_e, T)] (undiscounted, no optionality).
/// Vanilla / EarlyExercise: D(T) (F(t_e,T) - K)^+ (or put), t_e == T for vanilla.
/// AsianPrompt: D(T_last) (mean_i F(t_i, T_i) - K)^+ over the fixing schedule.
struct PayoffSpec {
  PayoffKind kind = PayoffKind::Vanilla;
  OptionKind option = OptionKind::Call;
  double strike = 0.0;
  double t_e = 1.0;
  double T = 1.0;
  std::vector<Fixing> fixings;

  static PayoffSpec forward(double t_e, double T);
  static PayoffSpec vanilla(double strike, double T, OptionKind option = OptionKind::Call);
  static PayoffSpec early_exercise(double strike, double t_e, double T, OptionKind option = OptionKind::Call);
  static PayoffSpec asian_prompt(double strike, std::vector<Fixing> fixings, OptionKind option = OptionKind::Call);

  std::vector<Fixing> observations() const;
  double payment_time() const;
};

void validate(const PayoffSpec& payoff);

/// Fixings at n evenly spaced times in [first, last], each observing the
/// prompt contract: the first settlement on a `contract_period` grid at or after the fixing.
std::vector<Fixing> prompt_fixings(double first, double last, std::size_t n, double contract_period);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

/// Sample mean and covariance of a vector-valued path functional.
class McMoments {
 public:
  explicit McMoments(std::size_t dims = 0);

  void add(std::span<const double> x);
  void merge(const McMoments& other);

  std::size_t count() const noexcept { return n_; }
  std::size_t dims() const noexcept { return mean_.size(); }
  double mean(std::size_t i) const { return mean_.at(i); }
  /// Unbiased sample covariance.
  double covariance(std::size_t i, std::size_t j) const;
  double std_error(std::size_t i) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;  // dims x dims
};

/// Forwards observed on one path, in observation order. A span is empty
/// when that mode was not requested.
struct PathForwards {
  std::span<const double> exact;
  std::span<const double> approximate;
};

using PathFunctional = std::function<void(const PathForwards&, std::span<double> out)>;

struct ModeSelection {
  bool exact = true;
  bool approximate = false;
};

/// Runs cfg.n_paths paths (horizon, steps, seed, antithetic, threads from
/// cfg; cfg.drift_mode ignored in favour of `modes`), calls `functional` for
/// each path and returns the moments of its `n_outputs` values. With
/// antithetic pairing each sample is the average over a pair, so count()
/// is n_paths / 2. Results depend only on cfg and inputs, not on the thread count.
McMoments simulate(const McConfig& cfg, const MarketCurves& curves, const ModelParams& p,
                   std::span<const Fixing> observations, ModeSelection modes, std::size_t n_outputs,
                   const PathFunctional& functional);

McEstimate price_payoff(const PayoffSpec& payoff, const McConfig& cfg, const MarketCurves& curves,
                        const ModelParams& p);

struct DriftStudyRow {
  double alpha = 0.0;
  double fwd_err_bp = 0.0;
  double fwd_stderr_bp = 0.0;
  double atm_vol_err_pct = 0.0;
  double atm_vol_stderr_pct = 0.0;
  double otm_vol_err_pct = 0.0;
  double otm_vol_stderr_pct = 0.0;
  // Diagnostics, not part of the CSV schema.
  double atm_vol_exact = 0.0;
  double otm_vol_exact = 0.0;
};

struct DriftStudySpec {
  double t_e = 1.0;
  double T = 2.0;
  double otm_moneyness = 1.4;
};

/// Paired exact-vs-approximate simulations (identical normals) for each alpha.
/// Implied vols are inverted against each mode's own simulated forward.
std::vector<DriftStudyRow> drift_error_study(std::span<const double> alphas, const McConfig& cfg,
                                             const MarketCurves& curves, const ModelParams& p_base,
                                             const DriftStudySpec& spec = {});

/// CSV with header
/// `alpha,fwd_err_bp,fwd_stderr_bp,atm_vol_err_pct,atm_vol_stderr_pct,otm_vol_err_pct,otm_vol_stderr_pct`.
void write_csv(std::ostream& out, std::span<const DriftStudyRow> rows);

}  // namespace cfsv
