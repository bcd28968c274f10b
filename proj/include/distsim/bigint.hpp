#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace distsim {

// Unsigned big integer, little-endian 64-bit limbs. Supports exactly the
// operations the exact-probability arithmetic needs: add, subtract, multiply,
// small division, comparisons. No general division.
class BigUint {
 public:
  BigUint() = default;
  BigUint(std::uint64_t v) {  // NOLINT: implicit by design
    if (v != 0) limbs_.push_back(v);
  }

  bool is_zero() const { return limbs_.empty(); }

  std::strong_ordering operator<=>(const BigUint& o) const {
    if (limbs_.size() != o.limbs_.size()) return limbs_.size() <=> o.limbs_.size();
    for (std::size_t i = limbs_.size(); i-- > 0;)
      if (limbs_[i] != o.limbs_[i]) return limbs_[i] <=> o.limbs_[i];
    return std::strong_ordering::equal;
  }
  bool operator==(const BigUint& o) const { return limbs_ == o.limbs_; }

  BigUint& operator+=(const BigUint& o) {
    if (limbs_.size() < o.limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
    unsigned __int128 carry = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      carry += limbs_[i];
      if (i < o.limbs_.size()) carry += o.limbs_[i];
      limbs_[i] = static_cast<std::uint64_t>(carry);
      carry >>= 64;
    }
    if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
  }
  BigUint operator+(const BigUint& o) const {
    BigUint r = *this;
    r += o;
    return r;
  }

  // Requires *this >= o.
  BigUint& operator-=(const BigUint& o) {
    assert(*this >= o);
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      unsigned __int128 sub = (i < o.limbs_.size() ? o.limbs_[i] : 0);
      sub += static_cast<std::uint64_t>(borrow);
      if (limbs_[i] >= sub) {
        limbs_[i] -= static_cast<std::uint64_t>(sub);
        borrow = 0;
      } else {
        limbs_[i] = static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) + limbs_[i] - sub);
        borrow = 1;
      }
    }
    normalize();
    return *this;
  }
  BigUint operator-(const BigUint& o) const {
    BigUint r = *this;
    r -= o;
    return r;
  }

  BigUint operator*(const BigUint& o) const {
    if (is_zero() || o.is_zero()) return BigUint();
    BigUint r;
    r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      unsigned __int128 carry = 0;
      for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
        carry += static_cast<unsigned __int128>(limbs_[i]) * o.limbs_[j] + r.limbs_[i + j];
        r.limbs_[i + j] = static_cast<std::uint64_t>(carry);
        carry >>= 64;
      }
      r.limbs_[i + o.limbs_.size()] = static_cast<std::uint64_t>(carry);
    }
    r.normalize();
    return r;
  }

  BigUint& mul_small(std::uint64_t m) {
    if (m == 0 || is_zero()) {
      limbs_.clear();
      return *this;
    }
    unsigned __int128 carry = 0;
    for (auto& limb : limbs_) {
      carry += static_cast<unsigned __int128>(limb) * m;
      limb = static_cast<std::uint64_t>(carry);
      carry >>= 64;
    }
    if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
  }

  // Divides in place by m, returns the remainder.
  std::uint64_t div_small(std::uint64_t m) {
    assert(m != 0);
    unsigned __int128 rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      rem = (rem << 64) | limbs_[i];
      limbs_[i] = static_cast<std::uint64_t>(rem / m);
      rem %= m;
    }
    normalize();
    return static_cast<std::uint64_t>(rem);
  }

  BigUint& shift_left(std::uint32_t bits) {
    if (is_zero() || bits == 0) return *this;
    const std::uint32_t whole = bits / 64, rest = bits % 64;
    limbs_.insert(limbs_.begin(), whole, 0);
    if (rest) {
      std::uint64_t carry = 0;
      for (std::size_t i = whole; i < limbs_.size(); ++i) {
        std::uint64_t nc = limbs_[i] >> (64 - rest);
        limbs_[i] = (limbs_[i] << rest) | carry;
        carry = nc;
      }
      if (carry) limbs_.push_back(carry);
    }
    return *this;
  }

  // *this *= k^e, with a shift fast path for powers of two.
  BigUint& mul_pow(std::uint32_t k, std::uint64_t e) {
    if (e == 0 || is_zero()) return *this;
    if ((k & (k - 1)) == 0) {
      std::uint32_t lg = 0;
      while ((1u << lg) != k) ++lg;
      return shift_left(static_cast<std::uint32_t>(e * lg));
    }
    // Chunk exponentiation so every step is a single small multiply.
    std::uint64_t chunk_pow = 1;
    std::uint32_t chunk = 0;
    while (chunk_pow <= UINT64_MAX / k) {
      chunk_pow *= k;
      ++chunk;
    }
    while (e >= chunk) {
      mul_small(chunk_pow);
      e -= chunk;
    }
    for (std::uint64_t i = 0; i < e; ++i) mul_small(k);
    return *this;
  }

  std::size_t bit_length() const {
    if (is_zero()) return 0;
    std::uint64_t top = limbs_.back();
    std::size_t b = 0;
    while (top) {
      top >>= 1;
      ++b;
    }
    return (limbs_.size() - 1) * 64 + b;
  }

  long double to_long_double() const {
    long double r = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) r = r * 18446744073709551616.0L + static_cast<long double>(limbs_[i]);
    return r;
  }

  std::string to_decimal() const {
    if (is_zero()) return "0";
    BigUint tmp = *this;
    std::string s;
    while (!tmp.is_zero()) s.push_back(static_cast<char>('0' + tmp.div_small(10)));
    return std::string(s.rbegin(), s.rend());
  }

  std::uint64_t low64() const { return limbs_.empty() ? 0 : limbs_[0]; }

 private:
  void normalize() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }
  std::vector<std::uint64_t> limbs_;
};

}  // namespace distsim
