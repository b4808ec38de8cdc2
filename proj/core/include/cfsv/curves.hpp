#pragma once

#include <utility>
#include <vector>

namespace cfsv {

/// Initial forward curve F(0,T) and discount curve D(T).
///
/// Lookups interpolate linearly in T on log F and log D and extrapolate flat
/// beyond the first and last pillars. An empty discount curve means D(T) = 1.
class MarketCurves {
 public:
  using Pillar = std::pair<double, double>;  // (T in years, value)

  MarketCurves(std::vector<Pillar> forwards, std::vector<Pillar> discounts = {});

  static MarketCurves flat(double forward, double discount = 1.0);

  double forward(double T) const noexcept;
  double discount(double T) const noexcept;

  const std::vector<Pillar>& forwards() const noexcept { return forwards_; }
  const std::vector<Pillar>& discounts() const noexcept { return discounts_; }

 private:
  std::vector<Pillar> forwards_;
  std::vector<Pillar> discounts_;
  std::vector<Pillar> log_forwards_;
  std::vector<Pillar> log_discounts_;
};

}  // namespace cfsv
