#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "causal/rational.hpp"

namespace causal {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// xoshiro256**: small, fully specified, identical on every platform.
// Standard-library distributions are implementation-defined, so all draws
// go through this class to keep seeded runs byte-identical.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s = splitmix64(s);
      word = s;
      s ^= 0xa5a5a5a5a5a5a5a5ULL;
    }
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t v, int k) {
      return (v << k) | (v >> (64 - k));
    };
    std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform over [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  double unit_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Exact inverse-CDF draw from a rational distribution: picks index k with
  // probability weights[k] / sum(weights).  The comparison r / 2^64 < cdf is
  // done in integers, so the draw is deterministic and unbiased up to the
  // 64-bit resolution of the stream.
  std::size_t pick(std::span<const Rat> weights) {
    Rat total = 0;
    for (const auto& w : weights) total += w;
    if (weights.empty() || total == 0) {
      throw QueryError("cannot draw from an empty distribution");
    }
    BigInt r = next_u64();
    BigInt two64 = BigInt(1) << 64;
    Rat cdf = 0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      cdf += weights[k];
      // r/2^64 < cdf/total  <=>  r * den(total-scaled cdf) < ...
      Rat scaled = cdf / total;
      if (r * denominator(scaled) < numerator(scaled) * two64) return k;
    }
    return weights.size() - 1;
  }

 private:
  std::uint64_t state_[4];
};

}  // namespace causal
