#pragma once

#include <cstddef>
#include <vector>

namespace cfsv {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t n);

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

/// Shared, lazily built rule of order n. Thread-safe.
const GaussLegendre& gauss_legendre(std::size_t n);

}  // namespace cfsv
