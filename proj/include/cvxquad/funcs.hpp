#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvxquad/errors.hpp"

namespace cvxquad {

/// Bounded closed interval [a, b] with a < b.
class Interval {
 public:
  Interval(double a, double b);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double length() const noexcept { return b_ - a_; }
  double midpoint() const noexcept { return 0.5 * (a_ + b_); }
  bool contains(double x) const noexcept { return a_ <= x && x <= b_; }
  bool interior(double x) const noexcept { return a_ < x && x < b_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double a_;
  double b_;
};

enum class Side { left, right };

std::string_view to_string(Side side);

using RealMap = std::function<double(double)>;

struct DerivativeEstimate {
  enum class Method { exact, finite_difference };

  double value = 0.0;
  Side side = Side::right;
  double uncertainty = 0.0;
  Method method = Method::exact;
};

/// Step schedule and tolerance for one-sided difference quotients.
struct FiniteDifferenceSettings {
  double h0 = 0.0;  // 0 selects a power of two near length / 256
  int levels = 8;
  double tol = 1e-9;
};

/// One-sided difference quotient at `x` with geometric step halving.
///
/// The value is the quotient at the smallest step, not extrapolated. For a
/// convex function the right quotients are nonincreasing and the left quotients
/// nondecreasing as the step shrinks; a violation beyond `tol` raises
/// ConvexityError.
DerivativeEstimate finite_difference_derivative(const RealMap& f, const Interval& domain, double x,
                                                Side side, double h0, int levels,
                                                double tol = 1e-9);

/// A convex function on a bounded interval together with its one-sided
/// derivative oracle. Endpoint derivatives f'+(a) and f'-(b) may be infinite.
class ConvexFunction {
 public:
  ConvexFunction(Interval domain, RealMap evaluate, RealMap left_derivative,
                 RealMap right_derivative, std::string label,
                 std::optional<RealMap> antiderivative = std::nullopt);

  /// Function known only through its values; derivatives come from
  /// finite_difference_derivative.
  static ConvexFunction from_values(Interval domain, RealMap evaluate, std::string label,
                                    FiniteDifferenceSettings fd = {});

  const Interval& domain() const noexcept { return domain_; }
  const std::string& label() const noexcept { return label_; }
  bool has_exact_derivatives() const noexcept { return exact_derivatives_; }
  bool has_antiderivative() const noexcept { return antiderivative_.has_value(); }

  /// f(t); DomainError outside the domain.
  double operator()(double t) const;

  /// f'-(x) or f'+(x). Left requires x > a, right requires x < b.
  double derivative(double x, Side side) const;
  DerivativeEstimate derivative_estimate(double x, Side side) const;

  /// Exact integral over [u, v] from the closed-form antiderivative.
  double integral(double u, double v) const;

  /// Same function and oracles on a subinterval of the domain.
  ConvexFunction restricted(const Interval& sub) const;

 private:
  Interval domain_;
  RealMap evaluate_;
  RealMap left_;
  RealMap right_;
  std::optional<RealMap> antiderivative_;
  std::string label_;
  bool exact_derivatives_ = true;
  FiniteDifferenceSettings fd_;
};

/// Free-function form of ConvexFunction::derivative.
double one_sided_derivative(const ConvexFunction& f, double x, Side side);

struct ConvexityReport {
  bool passed = true;
  double worst_violation = 0.0;
  std::array<double, 3> witness{};
  double threshold = 0.0;
};

/// Secant-slope monotonicity on an equispaced grid including both endpoints.
/// `tol` is relative to the sampled magnitude of f. A non-finite sample raises
/// EvaluationError instead of producing a verdict.
ConvexityReport check_convexity(const RealMap& f, const Interval& domain, int gridpoints,
                                double tol = 1e-9);
ConvexityReport check_convexity(const ConvexFunction& f, int gridpoints, double tol = 1e-9);

/// Reference functions with exact one-sided derivatives and antiderivatives.
///
///   kink          k|t - c|           params (k = 1, c = midpoint)
///   quadratic     c2 t^2 + c1 t + c0 params (c2 = 1, c1 = 0, c0 = 0), c2 >= 0
///   exp           e^t
///   neg_log       -ln t              domain a >= 0
///   xlogx         t ln t             domain a >= 0
///   power_p       |t|^p              params (p), p >= 1
///   linear        m t + c            params (m = 1, c = 0)
///   constant      c                  params (c = 0)
ConvexFunction catalog(std::string_view name, std::span<const double> params,
                       const Interval& domain);

const std::vector<std::string>& catalog_names();

}  // namespace cvxquad
