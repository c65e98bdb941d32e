#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

namespace iotrace {

// One SplitMix64 step; used to derive independent sub-seeds from a run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic RNG for everything in a run. mt19937_64 raw output is pinned
// by the standard; the bounded/real draws below are implemented here instead
// of going through <random> distributions, whose output is
// implementation-defined and would break byte-identical runs across stdlibs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n). n must be > 0. Modulo bias is < 2^-40 for the n used
  // in this codebase (all far below 2^24).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Uniform in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double exponential(double mean) {
    double u = unit();
    if (u >= 1.0) u = 0.0;
    return -mean * std::log(1.0 - u);
  }

  void fill(std::uint8_t* p, std::size_t n) {
    while (n >= 8) {
      std::uint64_t v = next_u64();
      std::memcpy(p, &v, 8);
      p += 8;
      n -= 8;
    }
    if (n > 0) {
      std::uint64_t v = next_u64();
      std::memcpy(p, &v, n);
    }
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace iotrace
