#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cvxquad/errors.hpp"

namespace cvxquad {

/// Closed interval [lo, hi] of extended reals certifying lo <= value <= hi.
class Enclosure {
 public:
  constexpr Enclosure() = default;

  Enclosure(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
      throw DomainError("enclosure requires lo <= hi");
    }
  }

  static Enclosure point(double v) { return {v, v}; }

  /// Smallest enclosure containing both values, in either order.
  static Enclosure hull(double u, double v) { return {std::min(u, v), std::max(u, v)}; }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  double midpoint() const noexcept { return 0.5 * (lo_ + hi_); }
  bool is_finite() const noexcept { return std::isfinite(lo_) && std::isfinite(hi_); }

  bool contains(double v, double slack = 0.0) const noexcept {
    return lo_ - slack <= v && v <= hi_ + slack;
  }
  bool contains(const Enclosure& other, double slack = 0.0) const noexcept {
    return lo_ - slack <= other.lo_ && other.hi_ <= hi_ + slack;
  }

  Enclosure operator+(const Enclosure& o) const { return {lo_ + o.lo_, hi_ + o.hi_}; }
  Enclosure& operator+=(const Enclosure& o) { return *this = *this + o; }

  /// Multiplication by a scalar; a negative factor swaps the ends.
  Enclosure scaled(double c) const { return hull(c * lo_, c * hi_); }

  friend bool operator==(const Enclosure&, const Enclosure&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Enclosure& e) {
    return os << '[' << e.lo_ << ", " << e.hi_ << ']';
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

}  // namespace cvxquad
