#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "ddrlab/errors.hpp"

namespace ddrlab {

// Nonnegative length that may be +infinity (lcr, inj, diam of noncompact
// models). min/max and comparisons saturate; scaling by 0 yields 0.
class ExtLength {
 public:
  constexpr ExtLength() = default;
  constexpr explicit ExtLength(double v) : v_(v) {}

  static constexpr ExtLength infinity() {
    return ExtLength(std::numeric_limits<double>::infinity());
  }

  // K^{-1/2} for a curvature bound K; infinite when K <= 0.
  static ExtLength inverse_sqrt(double k) {
    return k > 0.0 ? ExtLength(1.0 / std::sqrt(k)) : infinity();
  }

  constexpr bool is_finite() const { return v_ < std::numeric_limits<double>::infinity(); }
  constexpr double raw() const { return v_; }

  double value() const {
    if (!is_finite()) throw InvalidArgument("ExtLength: value() on infinity");
    return v_;
  }

  friend constexpr auto operator<=>(const ExtLength&, const ExtLength&) = default;

  friend ExtLength operator*(double s, ExtLength a) {
    if (s == 0.0) return ExtLength(0.0);
    return ExtLength(s * a.v_);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtLength& a) {
    if (a.is_finite()) return os << a.v_;
    return os << "inf";
  }

 private:
  double v_ = 0.0;
};

inline ExtLength min(ExtLength a, ExtLength b) { return a < b ? a : b; }
inline ExtLength max(ExtLength a, ExtLength b) { return a < b ? b : a; }
inline double min(double a, ExtLength b) { return b.is_finite() && b.raw() < a ? b.raw() : a; }

}  // namespace ddrlab
