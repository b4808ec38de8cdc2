#pragma once

#include <array>
#include <cstdint>

namespace cfsv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11): a keyed
/// bijection of a 128-bit counter. No state beyond (key, counter), so any
/// path's stream can be generated independently of every other path.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Standard normals for one Monte Carlo path, addressed by (seed, stream, step).
class PathNormals {
 public:
  PathNormals(std::uint64_t seed, std::uint64_t stream) noexcept;

  /// Four independent N(0,1) draws for time step `step` (Box-Muller on
  /// 52-bit uniforms from two Philox blocks).
  std::array<double, 4> draw(std::uint32_t step) const noexcept;

 private:
  Philox4x32::Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
};

/// Uniform on (0, 1) from 64 random bits; never returns 0 or 1.
double to_open_unit(std::uint64_t bits) noexcept;

}  // namespace cfsv
