#ifndef GAL_RATIONAL_HPP
#define GAL_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gal {

// Exact rational arithmetic on int64 with 128-bit intermediates.
// Backs the exact-orbit oracles for the dynamics and tower tests; double
// precision trajectories diverge from true orbits after a few dozen steps.
class Rational {
 public:
  Rational() = default;
  Rational(int64_t num) : num_(num), den_(1) {}  // NOLINT: implicit by design
  Rational(int64_t num, int64_t den) : num_(num), den_(den) { normalize(); }

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator+(const Rational& o) const {
    return from128(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
  }
  Rational operator-(const Rational& o) const {
    return from128(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
  }
  Rational operator*(const Rational& o) const {
    return from128(i128(num_) * o.num_, i128(den_) * o.den_);
  }
  Rational operator*(int64_t k) const { return from128(i128(num_) * k, i128(den_)); }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator<(const Rational& o) const { return i128(num_) * o.den_ < i128(o.num_) * den_; }
  bool operator>=(const Rational& o) const { return !(*this < o); }

  // fractional part in [0,1)
  Rational mod1() const {
    int64_t q = num_ / den_;
    int64_t r = num_ % den_;
    if (r < 0) r += den_;
    (void)q;
    return Rational(r, den_);
  }

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  using i128 = __int128;

  static Rational from128(i128 n, i128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::overflow_error("Rational overflow");
    Rational r;
    r.num_ = static_cast<int64_t>(n);
    r.den_ = static_cast<int64_t>(d);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }

  void normalize() {
    if (den_ == 0) throw std::domain_error("Rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  int64_t num_ = 0;
  int64_t den_ = 1;
};

}  // namespace gal

#endif  // GAL_RATIONAL_HPP
