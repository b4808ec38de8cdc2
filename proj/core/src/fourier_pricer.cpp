#include "cfsv/fourier_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cfsv/quadrature.hpp"

namespace cfsv {

void validate(const OptionSpec& spec) {
  if (!(spec.t_e > 0.0) || !(spec.t_e <= spec.T))
    raise(ErrorCode::DomainError, "option needs 0 < t_e <= T");
  if (!(spec.strike > 0.0)) raise(ErrorCode::DomainError, "strike must be > 0");
}

void validate(const QuadratureConfig& q) {
  if (!(q.theta_max > 0.0)) raise(ErrorCode::InvalidConfig, "theta_max must be > 0");
  if (q.n_nodes < 16) raise(ErrorCode::InvalidConfig, "need at least 16 nodes per panel");
  if (!(q.panel_width > 0.0)) raise(ErrorCode::InvalidConfig, "panel_width must be > 0");
  if (!(q.tail_tolerance > 0.0)) raise(ErrorCode::InvalidConfig, "tail_tolerance must be > 0");
}

FourierSlice::FourierSlice(double t_e, double T, const ModelParams& p, const QuadratureConfig& q)
    : t_e_(t_e), T_(T), tail_tolerance_(q.tail_tolerance) {
  validate(q);
  if (!(t_e > 0.0) || !(t_e <= T)) raise(ErrorCode::DomainError, "slice needs 0 < t_e <= T");
  ode_steps_ = q.ode_steps ? q.ode_steps : default_ode_steps(t_e);
  nodes_per_panel_ = q.n_nodes;

  const RiccatiSchedule schedule(t_e, T, p, ode_steps_);
  const GaussLegendre& rule = gauss_legendre(q.n_nodes);
  const auto panels = static_cast<std::size_t>(std::ceil(q.theta_max / q.panel_width - 1e-12));
  theta_.reserve(panels * q.n_nodes);
  weighted_f_.reserve(panels * q.n_nodes);
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) * q.panel_width;
    const double b = std::min(q.theta_max, a + q.panel_width);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double theta = mid + half * rule.nodes[j];
      const CharFnPoint pt = schedule.solve(cplx{theta, 0.0});
      const cplx f = std::exp(pt.A + pt.B * ModelParams::v0);
      theta_.push_back(theta);
      weighted_f_.push_back(half * rule.weights[j] * f / cplx{theta * theta, theta});
    }
  }
}

double FourierSlice::call(double F, double K, double D, QuadratureDiagnostics* diag) const {
  if (!(F > 0.0) || !(K > 0.0)) raise(ErrorCode::DomainError, "call needs F > 0 and K > 0");
  const double k = std::log(K / F);
  double integral = 0.0;
  double last_panel = 0.0;
  const std::size_t last_start = theta_.size() - nodes_per_panel_;
  for (std::size_t j = 0; j < theta_.size(); ++j) {
    const double phase = -theta_[j] * k;
    const double term = weighted_f_[j].real() * std::cos(phase) - weighted_f_[j].imag() * std::sin(phase);
    integral += term;
    if (j >= last_start) last_panel += term;
  }
  const double tail = K / std::numbers::pi * std::abs(last_panel) / F;
  if (diag) {
    diag->panels = theta_.size() / nodes_per_panel_;
    diag->nodes = theta_.size();
    diag->ode_steps = ode_steps_;
    diag->tail_contribution = tail;
  }
  if (!(tail < tail_tolerance_)) {
    std::ostringstream msg;
    msg << "last theta panel contributes " << tail << " (tolerance " << tail_tolerance_ << ")";
    raise(ErrorCode::QuadratureTailError, msg.str());
  }
  const double undiscounted = F - 0.5 * K - K / std::numbers::pi * integral;
  return D * std::clamp(undiscounted, std::max(F - K, 0.0), F);
}

double call_price(const OptionSpec& spec, const MarketCurves& curves, const ModelParams& p,
                  const QuadratureConfig& q, QuadratureDiagnostics* diag) {
  validate(spec);
  const FourierSlice slice(spec.t_e, spec.T, p, q);
  return slice.call(curves.forward(spec.T), spec.strike, curves.discount(spec.T), diag);
}

double put_price(const OptionSpec& spec, const MarketCurves& curves, const ModelParams& p,
                 const QuadratureConfig& q, QuadratureDiagnostics* diag) {
  const double c = call_price(spec, curves, p, q, diag);
  return c - curves.discount(spec.T) * (curves.forward(spec.T) - spec.strike);
}

double option_price(const OptionSpec& spec, const MarketCurves& curves, const ModelParams& p,
                    const QuadratureConfig& q, QuadratureDiagnostics* diag) {
  return spec.kind == OptionKind::Call ? call_price(spec, curves, p, q, diag)
                                       : put_price(spec, curves, p, q, diag);
}

std::vector<VolPoint> atm_term_structure(std::span<const double> expiries, const MarketCurves& curves,
                                         const ModelParams& p, const QuadratureConfig& q) {
  std::vector<VolPoint> out;
  out.reserve(expiries.size());
  double previous = 0.0;
  for (const double t : expiries) {
    if (!(t > previous)) raise(ErrorCode::DomainError, "expiries must be positive and ascending");
    previous = t;
    const FourierSlice slice(t, t, p, q);
    const double F = curves.forward(t);
    const double D = curves.discount(t);
    const double price = slice.call(F, F, D);
    out.push_back({t, t, F, price, implied_vol(price, F, F, t, D, OptionKind::Call)});
  }
  return out;
}

std::vector<VolPoint> smile_slice(std::span<const double> strikes, double t_e, double T,
                                  const MarketCurves& curves, const ModelParams& p,
                                  const QuadratureConfig& q) {
  const FourierSlice slice(t_e, T, p, q);
  const double F = curves.forward(T);
  const double D = curves.discount(T);
  std::vector<VolPoint> out;
  out.reserve(strikes.size());
  for (const double K : strikes) {
    if (!(K > 0.0)) raise(ErrorCode::DomainError, "strikes must be > 0");
    const double price = slice.call(F, K, D);
    out.push_back({t_e, T, K, price, implied_vol(price, F, K, t_e, D, OptionKind::Call)});
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const VolPoint> points) {
  out << "t_e,T,K,price,implied_vol\n";
  out << std::setprecision(17);
  for (const auto& pt : points)
    out << pt.t_e << ',' << pt.T << ',' << pt.strike << ',' << pt.price << ',' << pt.implied_vol << '\n';
}

}  // namespace cfsv
