#pragma once

#include <cstdint>
#include <random>

namespace dpca {

/// Seeded random source used by every generator in the project.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The transforms on top of it are implemented here rather than via
/// <random> distributions, whose algorithms are implementation-defined:
///   - uniform():  top 53 bits of one engine draw, scaled to [0, 1)
///   - below(n):   rejection sampling on the full 64-bit draw
///   - normal():   Marsaglia polar method, caching the second deviate
/// A given seed therefore yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dpca
