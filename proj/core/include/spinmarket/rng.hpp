#pragma once

#include <cstdint>
#include <random>

namespace spinmarket {

/// Random source used throughout the library. Every replica owns exactly one.
using Rng = std::mt19937_64;

/// One step of the splitmix64 generator; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed for stream `stream` derived from `master`.
///
/// The scheme is: start splitmix64 at `master ^ (0x9E3779B97F4A7C15 * (stream + 1))`
/// and take two outputs, the second of which is the seed. The mapping is
/// fixed so sweeps reproduce regardless of how cells are scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Uniform double in (0, 1] built from the top 53 bits of one draw.
inline double uniform_open_closed(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by Lemire's multiply-shift with rejection (exact).
inline std::uint32_t uniform_index(Rng& rng, std::uint32_t n) noexcept {
  auto x = static_cast<std::uint32_t>(rng() >> 32);
  std::uint64_t m = static_cast<std::uint64_t>(x) * n;
  auto low = static_cast<std::uint32_t>(m);
  if (low < n) {
    const std::uint32_t floor = (0u - n) % n;
    while (low < floor) {
      x = static_cast<std::uint32_t>(rng() >> 32);
      m = static_cast<std::uint64_t>(x) * n;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

}  // namespace spinmarket
