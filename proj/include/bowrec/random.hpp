#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace bowrec {

// SplitMix64 finalizer. Used to derive well-separated substream seeds from
// structured inputs like (base seed, step index, repeat index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

// Deterministic random stream on top of mt19937_64. Gaussians come from
// Box-Muller (pairwise, fixed emission order) rather than
// std::normal_distribution, whose output is implementation-defined; this
// keeps seed -> output stable across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  // Uniform in (0, 1]. Never returns 0, so `u <= p` fires with probability
  // exactly p for p in [0, 1].
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform index in [0, n). Modulo bias is below 2^-53 for any n we use.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bowrec
