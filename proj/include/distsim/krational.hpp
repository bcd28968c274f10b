#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <string>

#include "distsim/bigint.hpp"

namespace distsim {

// Exact non-negative rational of the form num * k^-exp. Marking probabilities
// and attenuations are powers of k, so their sums and products stay in this
// form; no general rational reduction is ever needed.
class KRat {
 public:
  KRat() = default;
  static KRat zero(std::uint32_t k) { return KRat(k, BigUint(), 0); }
  static KRat integer(std::uint32_t k, std::uint64_t v) { return KRat(k, BigUint(v), 0); }
  // k^-e
  static KRat inv_pow(std::uint32_t k, std::uint64_t e) { return KRat(k, BigUint(1), e); }

  std::uint32_t base() const { return k_; }
  bool is_zero() const { return num_.is_zero(); }
  const BigUint& num() const { return num_; }
  std::uint64_t exp() const { return exp_; }

  KRat& operator+=(const KRat& o) {
    assert(k_ == o.k_ || is_zero() || o.is_zero());
    if (o.is_zero()) return *this;
    if (is_zero()) {
      *this = o;
      return *this;
    }
    if (exp_ < o.exp_) {
      num_.mul_pow(k_, o.exp_ - exp_);
      exp_ = o.exp_;
      num_ += o.num_;
    } else if (exp_ > o.exp_) {
      BigUint scaled = o.num_;
      scaled.mul_pow(k_, exp_ - o.exp_);
      num_ += scaled;
    } else {
      num_ += o.num_;
    }
    return *this;
  }
  KRat operator+(const KRat& o) const {
    KRat r = *this;
    r += o;
    return r;
  }

  KRat operator*(const KRat& o) const {
    assert(k_ == o.k_ || is_zero() || o.is_zero());
    if (is_zero() || o.is_zero()) return zero(k_ ? k_ : o.k_);
    return KRat(k_, num_ * o.num_, exp_ + o.exp_);
  }

  KRat& mul_inv_pow(std::uint64_t e) {
    if (!is_zero()) exp_ += e;
    return *this;
  }

  // Exact division by k^-e, i.e. multiplication by k^e.
  KRat& div_inv_pow(std::uint64_t e) {
    if (is_zero()) return *this;
    if (e <= exp_) {
      exp_ -= e;
    } else {
      num_.mul_pow(k_, e - exp_);
      exp_ = 0;
    }
    return *this;
  }

  std::strong_ordering operator<=>(const KRat& o) const {
    if (is_zero() || o.is_zero()) {
      if (is_zero() && o.is_zero()) return std::strong_ordering::equal;
      return is_zero() ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    assert(k_ == o.k_);
    if (exp_ == o.exp_) return num_ <=> o.num_;
    if (exp_ < o.exp_) {
      BigUint lhs = num_;
      lhs.mul_pow(k_, o.exp_ - exp_);
      return lhs <=> o.num_;
    }
    BigUint rhs = o.num_;
    rhs.mul_pow(k_, exp_ - o.exp_);
    return num_ <=> rhs;
  }
  bool operator==(const KRat& o) const { return (*this <=> o) == std::strong_ordering::equal; }

  // Compare against the rational p/q without loss.
  std::strong_ordering cmp_ratio(std::uint64_t p, std::uint64_t q) const {
    assert(q != 0);
    BigUint lhs = num_;
    lhs.mul_small(q);
    BigUint rhs(p);
    rhs.mul_pow(k_ ? k_ : 2, exp_);
    return lhs <=> rhs;
  }

  long double to_long_double() const {
    if (is_zero()) return 0.0L;
    long double v = num_.to_long_double();
    long double base = static_cast<long double>(k_);
    std::uint64_t e = exp_;
    while (e > 0) {
      std::uint64_t step = e > 32 ? 32 : e;
      long double div = 1.0L;
      for (std::uint64_t i = 0; i < step; ++i) div *= base;
      v /= div;
      e -= step;
    }
    return v;
  }
  double to_double() const { return static_cast<double>(to_long_double()); }

  std::string to_string() const {
    if (is_zero()) return "0";
    return num_.to_decimal() + "*" + std::to_string(k_) + "^-" + std::to_string(exp_);
  }

  // Wire width: numerator bits plus exponent, for congestion accounting.
  int bit_size() const { return static_cast<int>(num_.bit_length()) + bits_for_exp(); }

 private:
  KRat(std::uint32_t k, BigUint num, std::uint64_t exp) : k_(k), num_(std::move(num)), exp_(exp) {}
  int bits_for_exp() const {
    int b = 1;
    std::uint64_t e = exp_;
    while (e) {
      e >>= 1;
      ++b;
    }
    return b;
  }

  std::uint32_t k_ = 0;
  BigUint num_;
  std::uint64_t exp_ = 0;
};

}  // namespace distsim
