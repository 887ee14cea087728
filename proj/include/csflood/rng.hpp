#pragma once

#include <cstdint>

namespace csflood {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used both as a counter-based
/// generator for signature matrices and as the seed-mixing function.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of session `session` inside grid cell `cell`:
/// splitmix64(splitmix64(splitmix64(master) ^ cell) ^ session).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell,
                                    std::uint64_t session) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ cell) ^ session);
}

/// Counter-mode SplitMix64: the i-th draw is splitmix64(seed + i * golden).
/// Identical across platforms and compilers.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr result_type operator()() noexcept {
    const std::uint64_t out = splitmix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

 private:
  std::uint64_t state_;
};

}  // namespace csflood
