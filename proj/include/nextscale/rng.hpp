#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace nextscale {

// Deterministic random source used everywhere a --seed appears.
//
// std::mt19937_64 itself produces an identical bit stream on every
// conforming implementation, but the standard <random> distributions do
// not, so all draws here go through explicit, fully specified transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Multiply-shift; the bias for any
  // n we use (well below 2^32) is far beyond measurable.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(eng_()) * n) >> 64);
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Standard normal via Box-Muller (explicit formula, no
  // std::normal_distribution).
  double next_gaussian() {
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Index sampled from unnormalized non-negative weights by CDF inversion.
  std::size_t next_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("Rng::next_weighted: weights sum to zero");
    double u = next_unit() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) return i;
    }
    return weights.size() - 1;  // u landed on accumulated rounding slack
  }

 private:
  std::mt19937_64 eng_;
};

// FNV-1a, 64-bit. Used for content digests and the hash scorer.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 finalizer. Cheap stateless mixing for hash-derived scores.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace nextscale
