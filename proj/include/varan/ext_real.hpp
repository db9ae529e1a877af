#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace varan {

/// Thrown when an operation would leave the extended half-line (-inf, +inf].
class ExtRealError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A real number or +infinity. NaN and -infinity are never stored.
///
/// This is the codomain of every function model in the toolkit: the lsc
/// functions considered here are bounded below on the compact domains we
/// sample, so only the upper end of the real line needs closing.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v) : v_(checked(v)) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal infinity() { return ExtReal(Raw{}, std::numeric_limits<double>::infinity()); }

  bool is_finite() const { return v_ != std::numeric_limits<double>::infinity(); }
  bool is_infinite() const { return !is_finite(); }

  /// Finite value; throws on +inf.
  double value() const {
    if (!is_finite()) throw ExtRealError("ExtReal::value() called on +inf");
    return v_;
  }
  /// Raw double view, +inf encoded as IEEE infinity.
  constexpr double raw() const { return v_; }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (!a.is_finite() || !b.is_finite()) return infinity();
    return ExtReal(a.v_ + b.v_);
  }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  /// a - b is defined unless b = +inf.
  friend ExtReal operator-(ExtReal a, ExtReal b) {
    if (!b.is_finite()) throw ExtRealError("subtracting +inf leaves the extended half-line");
    if (!a.is_finite()) return infinity();
    return ExtReal(a.v_ - b.v_);
  }

  /// Scaling by a nonnegative finite factor. 0 * inf is rejected.
  friend ExtReal operator*(double s, ExtReal a) {
    if (!(s >= 0.0) || std::isinf(s)) throw ExtRealError("ExtReal scaling needs a finite factor >= 0");
    if (!a.is_finite()) {
      if (s == 0.0) throw ExtRealError("0 * inf is undefined");
      return infinity();
    }
    return ExtReal(s * a.v_);
  }

  friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend std::partial_ordering operator<=>(ExtReal a, ExtReal b) { return a.v_ <=> b.v_; }

  friend std::ostream& operator<<(std::ostream& os, ExtReal a) {
    if (!a.is_finite()) return os << "+inf";
    return os << a.v_;
  }

 private:
  struct Raw {};
  constexpr ExtReal(Raw, double v) : v_(v) {}

  static double checked(double v) {
    if (std::isnan(v)) throw ExtRealError("NaN is not an extended real");
    if (v == -std::numeric_limits<double>::infinity()) throw ExtRealError("-inf is not admitted");
    return v;
  }

  double v_ = 0.0;
};

inline ExtReal min(ExtReal a, ExtReal b) { return b < a ? b : a; }
inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

/// Signed excess a - b of the inequality a <= b, as a double.
/// +inf - +inf counts as 0 (both sides agree); finite - inf is -inf.
inline double excess(ExtReal a, ExtReal b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (b.is_infinite()) return -std::numeric_limits<double>::infinity();
  if (a.is_infinite()) return std::numeric_limits<double>::infinity();
  return a.value() - b.value();
}

/// |a - b| with inf - inf = 0.
inline double abs_diff(ExtReal a, ExtReal b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite() || b.is_infinite()) return std::numeric_limits<double>::infinity();
  return std::abs(a.value() - b.value());
}

inline std::string to_string(ExtReal a) {
  if (!a.is_finite()) return "+inf";
  return std::to_string(a.value());
}

}  // namespace varan
