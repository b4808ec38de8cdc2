#include "cfsv/rng.hpp"

#include <cmath>
#include <numbers>

namespace cfsv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double to_open_unit(std::uint64_t bits) noexcept {
  // 52 high bits, shifted half a step off zero; the top value stays below 1.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

PathNormals::PathNormals(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_lo_(static_cast<std::uint32_t>(stream)),
      stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

std::array<double, 4> PathNormals::draw(std::uint32_t step) const noexcept {
  std::array<double, 4> u;
  for (std::uint32_t half = 0; half < 2; ++half) {
    const auto r = Philox4x32::block({step, stream_lo_, stream_hi_, half}, key_);
    u[2 * half] = to_open_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
    u[2 * half + 1] = to_open_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
  }
  std::array<double, 4> z;
  for (int i = 0; i < 2; ++i) {
    const double radius = std::sqrt(-2.0 * std::log(u[2 * i]));
    const double angle = 2.0 * std::numbers::pi * u[2 * i + 1];
    z[2 * i] = radius * std::cos(angle);
    z[2 * i + 1] = radius * std::sin(angle);
  }
  return z;
}

}  // namespace cfsv
