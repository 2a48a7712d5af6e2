#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvxquad/enclosure.hpp"
#include "cvxquad/funcs.hpp"

namespace cvxquad::quad {

enum class XiRule { midpoint, left, right, custom };

/// Division a = x0 < x1 < ... < xn = b with one intermediate point
/// xi_i in [x_i, x_{i+1}] per cell.
class Partition {
 public:
  Partition(std::vector<double> points, std::vector<double> xi);

  static Partition uniform(const Interval& iv, std::size_t n, XiRule rule,
                           std::span<const double> custom = {});

  std::size_t cells() const noexcept { return xi_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& xi() const noexcept { return xi_; }
  double a() const noexcept { return points_.front(); }
  double b() const noexcept { return points_.back(); }
  double width(std::size_t i) const { return points_[i + 1] - points_[i]; }

 private:
  std::vector<double> points_;
  std::vector<double> xi_;
};

Partition uniform_partition(const Interval& iv, std::size_t n, XiRule rule,
                            std::span<const double> custom = {});

struct QuadratureResult {
  double gn = 0.0;           // rule value
  Enclosure remainder;       // S_n = G_n - integral
  Enclosure integral;        // [G_n - S_n.hi, G_n - S_n.lo]
  std::size_t cells = 0;
  bool converged = true;     // adaptive only: width target met
};

/// G_n = sum (xi_i - x_i) f(x_i) + (x_{i+1} - xi_i) f(x_{i+1}).
double generalized_trapezoid(const ConvexFunction& f, const Partition& p);

/// Classical composite trapezoid rule on the partition nodes.
double trapezoid(const ConvexFunction& f, const Partition& p);

/// Remainder enclosure of one cell [u, v] split at xi:
///   lo = 1/2 [(v - xi)^2 f'+(xi) - (xi - u)^2 f'-(xi)]
///   hi = 1/2 [(v - xi)^2 f'-(v)  - (xi - u)^2 f'+(u)]
/// Zero-weighted terms are skipped.
Enclosure cell_remainder(const ConvexFunction& f, double u, double xi, double v);

/// Per-cell remainder enclosures. ConvexityError names the first cell whose
/// lower bound exceeds its upper bound by more than the rounding slack.
std::vector<Enclosure> cell_remainders(const ConvexFunction& f, const Partition& p);

/// Sum of cell_remainders.
Enclosure remainder_enclosure(const ConvexFunction& f, const Partition& p);

/// Midpoint specialization:
///   lo = 1/8 sum [f'+(m_i) - f'-(m_i)] h_i^2,  hi = 1/8 sum [f'-(x_{i+1}) - f'+(x_i)] h_i^2.
/// Rejects partitions whose intermediate points are not the cell midpoints.
Enclosure trapezoid_remainder_enclosure(const ConvexFunction& f, const Partition& p);

/// sum ((x_i + x_{i+1})/2 - xi_i) h_i f'(xi_i), a lower bound on S_n for
/// f differentiable at every xi_i.
double differentiable_lower_remainder(const ConvexFunction& f, const Partition& p,
                                      double tol = 1e-9);

/// G_n together with the certified remainder and integral enclosures.
QuadratureResult integrate(const ConvexFunction& f, const Partition& p);

/// Greedy refinement: starts from one midpoint cell and bisects the cell with
/// the widest enclosure (leftmost on ties) until the total width is <= eps or
/// max_cells is reached. The enclosure is valid either way; `converged`
/// reports whether eps was met.
QuadratureResult adaptive_integrate(const ConvexFunction& f, double eps,
                                    std::size_t max_cells = 100000);

}  // namespace cvxquad::quad
