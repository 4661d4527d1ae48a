#pragma once

// Counter-based random streams. A stream is identified by (seed, path...) and
// the n-th draw is a pure function of (key, n), so results never depend on
// how work is split across threads.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <vector>

#include "wcga/core.hpp"

namespace wcga {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {})
      : key_(splitmix64(seed)) {
    for (auto p : path) key_ = splitmix64(key_ ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  }

  /// Child stream; independent of how many draws were taken from *this.
  [[nodiscard]] CounterRng substream(std::uint64_t id) const {
    CounterRng child(*this);
    child.key_ = splitmix64(key_ ^ splitmix64(id + 0xD1B54A32D192ED03ULL));
    child.counter_ = 0;
    return child;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * (++counter_));
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only; no cached state).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  /// Complex standard Gaussian, E|z|^2 = 1.
  Complex complex_normal() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  std::size_t below(std::size_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw ParameterError("cannot draw more distinct indices than available");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + below(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace wcga
