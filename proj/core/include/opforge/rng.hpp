#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

#include "opforge/errors.hpp"

namespace opforge {

// splitmix64 step. Used both as a seed expander and as a cheap stream mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over bytes; stable content hash for problem ids and seed streams.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic generator with hand-rolled sampling primitives. std::mt19937
// plus std::uniform_int_distribution is not reproducible across standard
// library implementations, so bounded draws and shuffles are implemented here
// on top of xoshiro256**.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Derives an independent stream seed; used to give each problem its own rng.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t sm = base ^ (0x9e3779b97f4a7c15ULL + stream);
    std::uint64_t a = splitmix64(sm);
    return a ^ splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform integer in [lo, hi], both inclusive. Rejection sampling keeps the
  // draw unbiased and the byte stream identical on every platform.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ConfigError("rng: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = next();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool chance(double p) { return uniform01() < p; }

  // Index draw from unnormalized non-negative weights.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) throw ConfigError("rng: weights sum to zero");
    double mark = uniform01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      mark -= weights[i];
      if (mark < 0) return i;
    }
    return weights.size() - 1;
  }

  // Fisher-Yates; self-contained because std::shuffle's draw pattern is
  // implementation-defined.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(i) - 1));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    if (items.empty()) throw ConfigError("rng: pick from empty list");
    return items[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(items.size()) - 1))];
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace opforge
