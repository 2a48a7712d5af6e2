#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvxquad/enclosure.hpp"
#include "cvxquad/funcs.hpp"

// Single-interval bounds on the generalized trapezoid gap
//
//   gap(x) = (x - a) f(a) + (b - x) f(b) - integral_a^b f
//
// for a convex f on [a, b], and the related Hermite-Hadamard estimates.
namespace cvxquad::pointwise {

/// Reference value of the gap. Uses the closed-form antiderivative when the
/// function has one, otherwise an adaptive enclosure of width <= 1e-10.
double gap(const ConvexFunction& f, double x);

/// 1/2 [(b - x)^2 f'+(x) - (x - a)^2 f'-(x)]; x strictly interior.
double lower_gap_bound(const ConvexFunction& f, double x);

/// 1/2 [(b - x)^2 f'-(b) - (x - a)^2 f'+(a)]; x in [a, b]. Infinite endpoint
/// slopes give +inf.
double upper_gap_bound(const ConvexFunction& f, double x);

/// [lower_gap_bound, upper_gap_bound].
Enclosure gap_enclosure(const ConvexFunction& f, double x);

/// (f(a) + f(b))/2 - (1/(b - a)) integral_a^b f, reference value.
double hh_difference(const ConvexFunction& f);

/// Two-sided bound on hh_difference:
///   lo = 1/8 [f'+(m) - f'-(m)] (b - a),   hi = 1/8 [f'-(b) - f'+(a)] (b - a).
Enclosure hh_bounds(const ConvexFunction& f);

/// (b - a)((a + b)/2 - x) f'(x) at a point of differentiability. Throws
/// NotDifferentiableError when the one-sided derivatives differ by more than
/// tol (relative).
double differentiable_lower(const ConvexFunction& f, double x, double tol = 1e-9);

struct WindowReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Symmetric window [x - h/2, x + h/2]:
///   0 <= 1/8 h^2 [f'+(x) - f'-(x)] <= h (f(x - h/2) + f(x + h/2))/2 - integral.
WindowReport window_inequality(const ConvexFunction& f, double x, double h,
                               double slack = 1e-9);

struct OptimalPoint {
  double x0 = 0.0;
  double gap_upper = 0.0;
};

/// Minimizer of upper_gap_bound over x. With A = f'+(a), B = f'-(b) finite and
/// A <= 0 <= B, A < B:
///   x0 = (bB - aA)/(B - A),   gap_upper = -AB(b - a)^2 / (2(B - A)).
OptimalPoint optimal_point_bound(const ConvexFunction& f);

/// User-supplied constants for the bounds that hold without convexity.
struct ClassicalConstants {
  std::optional<double> total_variation;
  std::optional<double> lipschitz;
  std::optional<double> dnorm_inf;
  std::optional<double> dnorm_p;
  std::optional<double> p;  // exponent for dnorm_p, p > 1
  std::optional<double> dnorm_1;
  bool monotone_nondecreasing = false;  // enables the f(b) - f(a) bound
};

enum class ClassicalKind { bounded_variation, monotone, lipschitz, dnorm_inf, dnorm_p, dnorm_1 };

std::string to_string(ClassicalKind kind);

struct NamedBound {
  ClassicalKind kind;
  double bound;
};

/// Bound on |gap(x)| of one kind; PreconditionError when its constant is absent.
double classical_bound(const ConvexFunction& f, double x, const ClassicalConstants& c,
                       ClassicalKind kind);

/// Every bound whose constant is present. At least one constant is required.
std::vector<NamedBound> classical_bounds(const ConvexFunction& f, double x,
                                         const ClassicalConstants& c);

}  // namespace cvxquad::pointwise
