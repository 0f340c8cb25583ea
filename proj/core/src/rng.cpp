#include "spinmarket/rng.hpp"

namespace spinmarket {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  std::uint64_t state = master ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  splitmix64(state);
  return splitmix64(state);
}

}  // namespace spinmarket
