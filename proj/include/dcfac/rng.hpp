#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dcfac {

/// Deterministic random source used everywhere randomness is needed.
/// mt19937_64 is specified bit-for-bit by the C++ standard, and the normal
/// deviates come from our own Box-Muller transform, so identical seeds give
/// identical streams on every platform.
class Rng {
 public:
  static constexpr const char* kGeneratorId = "mt19937_64/box-muller";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi] (inclusive); assumes a tiny range so modulo
  /// bias is negligible for test scaffolding.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  /// Standard normal via Box-Muller; generates pairs and caches the second.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace dcfac
