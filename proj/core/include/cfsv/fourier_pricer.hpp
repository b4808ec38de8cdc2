#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfsv/black76.hpp"
#include "cfsv/charfn.hpp"
#include "cfsv/curves.hpp"
#include "cfsv/model.hpp"

namespace cfsv {

/// European option delivering the forward settling at T, exercised at t_e <= T.
/// t_e == T is a vanilla; t_e < T is an early-exercise option.
struct OptionSpec {
  double t_e = 1.0;
  double T = 1.0;
  double strike = 1.0;
  OptionKind kind = OptionKind::Call;
};

void validate(const OptionSpec& spec);

/// Composite Gauss-Legendre over [0, theta_max] in panels of `panel_width`.
struct QuadratureConfig {
  double theta_max = 200.0;
  std::size_t n_nodes = 64;  ///< nodes per panel
  double panel_width = 10.0;
  double tail_tolerance = 1e-10;  ///< max |last panel| contribution, relative to F(0,T)
  std::size_t ode_steps = 0;      ///< 0 selects default_ode_steps(t_e)
};

void validate(const QuadratureConfig& q);

struct QuadratureDiagnostics {
  std::size_t panels = 0;
  std::size_t nodes = 0;
  std::size_t ode_steps = 0;
  double tail_contribution = 0.0;
};

/// Characteristic function of x(t_e, T) tabulated on the quadrature nodes.
/// Strike-independent, so one slice prices any number of strikes.
class FourierSlice {
 public:
  FourierSlice(double t_e, double T, const ModelParams& p, const QuadratureConfig& q = {});

  /// Discounted call price; clamped to [D max(F-K,0), D F].
  /// Throws QuadratureTailError if the last panel is not negligible.
  double call(double F, double K, double D, QuadratureDiagnostics* diag = nullptr) const;

  double expiry() const noexcept { return t_e_; }
  double settlement() const noexcept { return T_; }

 private:
  double t_e_;
  double T_;
  double tail_tolerance_;
  std::size_t ode_steps_;
  std::size_t nodes_per_panel_;
  std::vector<double> theta_;
  std::vector<cplx> weighted_f_;  // w_j f(theta_j) / (theta_j^2 + i theta_j)
};

double call_price(const OptionSpec& spec, const MarketCurves& curves, const ModelParams& p,
                  const QuadratureConfig& q = {}, QuadratureDiagnostics* diag = nullptr);

/// Put via parity: P = C - D(T) (F - K).
double put_price(const OptionSpec& spec, const MarketCurves& curves, const ModelParams& p,
                 const QuadratureConfig& q = {}, QuadratureDiagnostics* diag = nullptr);

/// Dispatches on spec.kind.
double option_price(const OptionSpec& spec, const MarketCurves& curves, const ModelParams& p,
                    const QuadratureConfig& q = {}, QuadratureDiagnostics* diag = nullptr);

struct VolPoint {
  double t_e;
  double T;
  double strike;
  double price;
  double implied_vol;
};

/// ATM-forward vanilla (T = t_e) implied vols per expiry.
std::vector<VolPoint> atm_term_structure(std::span<const double> expiries, const MarketCurves& curves,
                                         const ModelParams& p, const QuadratureConfig& q = {});

/// Call implied vols across strikes at a fixed (t_e, T).
std::vector<VolPoint> smile_slice(std::span<const double> strikes, double t_e, double T,
                                  const MarketCurves& curves, const ModelParams& p,
                                  const QuadratureConfig& q = {});

/// CSV with header `t_e,T,K,price,implied_vol`.
void write_csv(std::ostream& out, std::span<const VolPoint> points);

}  // namespace cfsv
