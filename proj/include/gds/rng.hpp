#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gds {

// splitmix64 step, used to whiten seeds before feeding the engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream. The engine is std::mt19937_64 (portable output by
/// the standard); the uniform/normal mappings are spelled out here so a
/// (seed, stream) pair produces the same draw sequence on every build.
/// Independent streams for parallel trials come from distinct stream ids.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t st = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    const std::uint64_t a = splitmix64(st);
    const std::uint64_t b = splitmix64(st);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the spare draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double stddev) { return stddev * normal(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    const int v = static_cast<int>(uniform01() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  /// Draw an index from a categorical distribution given its inclusive
  /// cumulative weights (last entry = total mass).
  int categorical(const std::vector<double>& cdf) {
    const double u = uniform01() * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return static_cast<int>(lo);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gds
