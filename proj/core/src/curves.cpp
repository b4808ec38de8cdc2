#include "cfsv/curves.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfsv/error.hpp"

namespace cfsv {

namespace {

void check_pillars(const std::vector<MarketCurves::Pillar>& pillars, const char* name,
                   bool is_discount) {
  for (std::size_t i = 0; i < pillars.size(); ++i) {
    const auto [T, value] = pillars[i];
    if (!std::isfinite(T) || T < 0.0)
      raise(ErrorCode::InvalidCurve, std::string(name) + ": settlement times must be >= 0");
    if (i > 0 && !(T > pillars[i - 1].first))
      raise(ErrorCode::InvalidCurve, std::string(name) + ": settlement times must increase");
    if (!std::isfinite(value) || value <= 0.0)
      raise(ErrorCode::InvalidCurve, std::string(name) + ": values must be > 0");
    if (is_discount && value > 1.0)
      raise(ErrorCode::InvalidCurve, "discounts: values must lie in (0, 1]");
  }
}

std::vector<MarketCurves::Pillar> logged(const std::vector<MarketCurves::Pillar>& in) {
  std::vector<MarketCurves::Pillar> out;
  out.reserve(in.size());
  for (const auto& [T, v] : in) out.emplace_back(T, std::log(v));
  return out;
}

double interpolate(const std::vector<MarketCurves::Pillar>& pillars, double T) noexcept {
  if (T <= pillars.front().first) return pillars.front().second;
  if (T >= pillars.back().first) return pillars.back().second;
  auto hi = std::upper_bound(pillars.begin(), pillars.end(), T,
                             [](double x, const MarketCurves::Pillar& p) { return x < p.first; });
  auto lo = hi - 1;
  const double w = (T - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

}  // namespace

MarketCurves::MarketCurves(std::vector<Pillar> forwards, std::vector<Pillar> discounts)
    : forwards_(std::move(forwards)), discounts_(std::move(discounts)) {
  if (forwards_.empty()) raise(ErrorCode::InvalidCurve, "forward curve needs at least one pillar");
  check_pillars(forwards_, "forwards", false);
  check_pillars(discounts_, "discounts", true);
  log_forwards_ = logged(forwards_);
  log_discounts_ = logged(discounts_);
}

MarketCurves MarketCurves::flat(double forward, double discount) {
  std::vector<Pillar> d;
  if (discount != 1.0) d.emplace_back(0.0, discount);
  return MarketCurves({{0.0, forward}}, std::move(d));
}

double MarketCurves::forward(double T) const noexcept {
  return std::exp(interpolate(log_forwards_, T));
}

double MarketCurves::discount(double T) const noexcept {
  if (log_discounts_.empty()) return 1.0;
  return std::exp(interpolate(log_discounts_, T));
}

}  // namespace cfsv
