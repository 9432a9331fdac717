#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace adamhp {

// Stateless 64-bit avalanche (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Substream seed for (master, a, b, c); collision-free enough for trial grids
// and stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  return mix64(mix64(mix64(mix64(master) ^ a) ^ b) ^ c);
}

// mt19937_64 with raw-bit conversions instead of <random> distributions:
// distribution implementations are not pinned by the standard, raw bits are.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1), 53-bit resolution
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1], safe as a log argument
  double uniform01_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // symmetric uniform on [-w, w); |result| <= w holds exactly in floats
  double symmetric(double w) { return w * (2.0 * uniform01() - 1.0); }

  // uniform index in [0, n) by rejection, no modulo bias
  std::size_t index(std::size_t n) {
    const std::uint64_t limit = ~0ull - ~0ull % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return std::size_t(r % n);
  }

  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Box-Muller, one value per call
  double gaussian() {
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adamhp
