#pragma once

#include <cstdint>

namespace edrelax {

/// splitmix64 stream. Standard-library distributions are implementation
/// defined, so seeded case generation uses this to stay reproducible across
/// compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(next_u64() % span);
  }

  bool chance(double p) { return uniform() < p; }

  /// Derived deterministic sub-stream, for per-instance seeding.
  Rng fork() { return Rng(next_u64() ^ 0xa02bdbf7bb3c0a7ull); }

 private:
  std::uint64_t state_;
};

}  // namespace edrelax
