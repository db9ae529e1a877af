#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace varan {

/// Exact fraction num/den with 64-bit parts. Intermediates use 128 bits and
/// any result that does not fit back into 64 bits throws std::overflow_error,
/// so a computation either stays exact or stops.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num) : num_(num), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  long double to_long_double() const { return static_cast<long double>(num_) / static_cast<long double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
  }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational from_wide(__int128 num, __int128 den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    if (num > lim || num < -lim || den > lim) throw std::overflow_error("Rational: 64-bit overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) { *this = from_wide(num, den); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace varan
