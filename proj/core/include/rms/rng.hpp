#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace rms {

/// splitmix64 finalizer. Used to derive independent streams from keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xCBF29CE484222325ull) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Order-sensitive key hashing: hash_key(seed, "task-3", 2, "ds").
class KeyHasher {
 public:
  explicit constexpr KeyHasher(std::uint64_t seed) noexcept : h_(mix64(seed)) {}

  constexpr KeyHasher& add(std::uint64_t v) noexcept {
    h_ = mix64(h_ ^ mix64(v + 0x632BE59BD9B4E019ull));
    return *this;
  }
  constexpr KeyHasher& add(std::string_view s) noexcept {
    return add(fnv1a(s));
  }
  constexpr std::uint64_t value() const noexcept { return h_; }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double unit() const noexcept {
    return static_cast<double>(h_ >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t h_;
};

/// Seeded generator with distribution helpers that do not depend on the
/// standard library's (implementation-defined) distribution algorithms, so
/// streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return static_cast<std::size_t>(x % bound);
  }

  /// Uniform integer in [lo, hi].
  int between(int lo, int hi) {
    return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
  }

  template <class Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      std::size_t j = index(i);
      using std::swap;
      swap(c[i - 1], c[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rms
