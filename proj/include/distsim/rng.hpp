#pragma once

#include <cstdint>

namespace distsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator keyed by (seed, stream, round). Draws are a pure
// function of the key and a local counter, so runs are replayable and
// independent of node execution order.
class CounterRng {
 public:
  static CounterRng at(std::uint64_t seed, std::uint64_t stream, std::uint64_t round) {
    std::uint64_t k = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    k = splitmix64(k ^ splitmix64(stream ^ 0x13198a2e03707344ULL));
    k = splitmix64(k ^ splitmix64(round ^ 0xa4093822299f31d0ULL));
    return CounterRng(k);
  }

  std::uint64_t next() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (++ctr_)); }

  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next() % n; }

  // Uniform in [0,1), 53-bit resolution.
  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

  bool coin(double p) { return unit() < p; }

  // True with probability exactly k^-e.
  bool coin_inv_pow(std::uint32_t k, std::uint32_t e) {
    for (std::uint32_t i = 0; i < e; ++i)
      if (below(k) != 0) return false;
    return true;
  }

 private:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(seed ^ splitmix64(a ^ splitmix64(b ^ splitmix64(c))));
}

}  // namespace detail

inline int ceil_log2(std::uint64_t x) {
  int b = 0;
  std::uint64_t v = 1;
  while (v < x) {
    v <<= 1;
    ++b;
  }
  return b;
}

// Bit cost of transmitting a value in [0, max_value].
inline int bits_for_value(std::uint64_t max_value) { return ceil_log2(max_value + 1); }

}  // namespace distsim
