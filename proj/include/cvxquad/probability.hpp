#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cvxquad/enclosure.hpp"
#include "cvxquad/funcs.hpp"

// Expectation bounds for a random variable on [a, b] whose density is
// nondecreasing. The cdf F(x) = integral_a^x f is then convex with
// F'-(x) = f(x-) and F'+(x) = f(x+), and integral_a^b F = b - E(X).
namespace cvxquad::prob {

/// Nondecreasing probability density on [a, b] with one-sided limits.
class MonotoneDensity {
 public:
  /// Density with explicit one-sided limit oracles f(x-) and f(x+).
  MonotoneDensity(Interval domain, RealMap evaluate, RealMap left_limit, RealMap right_limit,
                  std::string label, std::optional<RealMap> cdf = std::nullopt);

  /// Continuous density: both one-sided limits equal f(x).
  static MonotoneDensity continuous(Interval domain, RealMap evaluate, std::string label,
                                    std::optional<RealMap> cdf = std::nullopt);

  const Interval& domain() const noexcept { return domain_; }
  const std::string& label() const noexcept { return label_; }
  bool has_cdf() const noexcept { return cdf_.has_value(); }

  double operator()(double t) const;
  /// f(x-) for x in (a, b], f(x+) for x in [a, b).
  double limit(double x, Side side) const;

  /// F(x); closed form when declared, otherwise a cumulative trapezoid table of
  /// f on 2^16 cells, built on first use and shared between copies.
  double cdf(double x) const;

  /// The convex cdf with the density limits as its one-sided derivatives.
  ConvexFunction cdf_function() const;

 private:
  Interval domain_;
  RealMap evaluate_;
  RealMap left_;
  RealMap right_;
  std::optional<RealMap> cdf_;
  std::string label_;

  struct CdfTable;
  const std::vector<double>& table() const;
  std::shared_ptr<CdfTable> table_;
};

struct DensityReport {
  bool nonnegative = true;
  bool monotone = true;
  bool normalized = true;
  Enclosure mass;  // enclosure of integral_a^b f
  std::vector<std::string> problems;

  bool valid() const noexcept { return nonnegative && monotone && normalized; }
};

/// Checks nonnegativity and monotonicity on an equispaced grid and that the
/// total mass lies within tol of 1. The mass enclosure is exact from a declared
/// cdf, otherwise the lower/upper Riemann sums, which bracket the integral of
/// any nondecreasing function.
DensityReport validate_density(const MonotoneDensity& d, int gridpoints = 1025,
                               double tol = 1e-6);

struct ExpectationEnclosure {
  double lo = 0.0;
  double hi = 0.0;
  double x_lower = 0.0;  // split point that produced lo
  double x_upper = 0.0;  // split point that produced hi
};

/// x + 1/2 [(b - x)^2 f(x+) - (x - a)^2 f(x-)] <= E(X); x strictly interior.
double expectation_lower(const MonotoneDensity& d, double x);

/// E(X) <= x + 1/2 [(b - x)^2 f(b-) - (x - a)^2 f(a+)]; x in [a, b].
double expectation_upper(const MonotoneDensity& d, double x);

ExpectationEnclosure expectation_enclosure(const MonotoneDensity& d, double x);

/// expectation_enclosure at the midpoint m:
///   m + 1/8 [f(m+) - f(m-)](b - a)^2 <= E(X) <= m + 1/8 [f(b-) - f(a+)](b - a)^2.
ExpectationEnclosure midpoint_expectation_enclosure(const MonotoneDensity& d);

/// Best lower bound over the interior grid points and best upper bound over
/// all grid points, endpoints included.
ExpectationEnclosure best_expectation_enclosure(const MonotoneDensity& d, int gridpoints);

struct ExpectationCrossCheck {
  double via_density = 0.0;  // integral of t f(t)
  Enclosure via_cdf;         // b - integral of F, F integrated with certified bounds
};

/// E(X) computed two ways: directly from t f(t) with a composite rule, and
/// from b - integral_a^b F using the adaptive enclosure on the convex cdf.
ExpectationCrossCheck expectation_cross_check(const MonotoneDensity& d, double eps = 1e-9);

}  // namespace cvxquad::prob
