#include "cvxquad/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvxquad/quadrature.hpp"

namespace cvxquad::pointwise {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReferenceEps = 1e-10;

double integral_over(const ConvexFunction& f, double u, double v) {
  if (f.has_antiderivative()) return f.integral(u, v);
  const ConvexFunction g =
      u == f.domain().a() && v == f.domain().b() ? f : f.restricted(Interval(u, v));
  const quad::QuadratureResult r = quad::adaptive_integrate(g, kReferenceEps, 1u << 22);
  if (!r.converged) {
    throw EvaluationError("reference integral of " + f.label() + " did not reach width " +
                          std::to_string(kReferenceEps));
  }
  return r.integral.midpoint();
}

void require_interior(const ConvexFunction& f, double x) {
  if (!f.domain().interior(x)) throw DomainError("x must lie strictly inside the domain");
}

void require_closed(const ConvexFunction& f, double x) {
  if (!f.domain().contains(x)) throw DomainError("x must lie in the domain");
}

// Crossing bounds beyond rounding mean the convexity hypothesis failed.
Enclosure ordered(double lo, double hi) {
  if (lo > hi && lo - hi > 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)})) {
    throw ConvexityError("lower bound exceeds upper bound: f is not convex");
  }
  return Enclosure::hull(lo, hi);
}

}  // namespace

double gap(const ConvexFunction& f, double x) {
  require_closed(f, x);
  const double a = f.domain().a();
  const double b = f.domain().b();
  double g = -integral_over(f, a, b);
  if (x > a) g += (x - a) * f(a);
  if (b > x) g += (b - x) * f(b);
  return g;
}

double lower_gap_bound(const ConvexFunction& f, double x) {
  require_interior(f, x);
  const double a = f.domain().a();
  const double b = f.domain().b();
  return 0.5 * ((b - x) * (b - x) * f.derivative(x, Side::right) -
                (x - a) * (x - a) * f.derivative(x, Side::left));
}

double upper_gap_bound(const ConvexFunction& f, double x) {
  require_closed(f, x);
  const double a = f.domain().a();
  const double b = f.domain().b();
  double u = 0.0;
  if (b > x) u += (b - x) * (b - x) * f.derivative(b, Side::left);
  if (x > a) u -= (x - a) * (x - a) * f.derivative(a, Side::right);
  return std::isnan(u) ? kInf : 0.5 * u;
}

Enclosure gap_enclosure(const ConvexFunction& f, double x) {
  return ordered(lower_gap_bound(f, x), upper_gap_bound(f, x));
}

double hh_difference(const ConvexFunction& f) {
  const double a = f.domain().a();
  const double b = f.domain().b();
  return 0.5 * (f(a) + f(b)) - integral_over(f, a, b) / (b - a);
}

Enclosure hh_bounds(const ConvexFunction& f) {
  const Interval& d = f.domain();
  const double m = d.midpoint();
  const double lo = 0.125 * (f.derivative(m, Side::right) - f.derivative(m, Side::left)) * d.length();
  const double hi =
      0.125 * (f.derivative(d.b(), Side::left) - f.derivative(d.a(), Side::right)) * d.length();
  return ordered(lo, hi);
}

double differentiable_lower(const ConvexFunction& f, double x, double tol) {
  require_interior(f, x);
  const double dl = f.derivative(x, Side::left);
  const double dr = f.derivative(x, Side::right);
  if (std::abs(dr - dl) > tol * std::max({1.0, std::abs(dl), std::abs(dr)})) {
    throw NotDifferentiableError("f is not differentiable at x = " + std::to_string(x));
  }
  const Interval& d = f.domain();
  return d.length() * (d.midpoint() - x) * dr;
}

WindowReport window_inequality(const ConvexFunction& f, double x, double h, double slack) {
  if (!(h > 0.0)) throw DomainError("window width must be positive");
  const double u = x - 0.5 * h;
  const double v = x + 0.5 * h;
  if (!f.domain().contains(u) || !f.domain().contains(v)) {
    throw DomainError("window leaves the domain");
  }
  WindowReport r;
  r.lhs = 0.125 * h * h * (f.derivative(x, Side::right) - f.derivative(x, Side::left));
  r.rhs = 0.5 * (f(u) + f(v)) * h - integral_over(f, u, v);
  r.holds = r.lhs >= -slack && r.lhs <= r.rhs + slack;
  return r;
}

OptimalPoint optimal_point_bound(const ConvexFunction& f) {
  const double a = f.domain().a();
  const double b = f.domain().b();
  const double A = f.derivative(a, Side::right);
  const double B = f.derivative(b, Side::left);
  if (!std::isfinite(A) || !std::isfinite(B)) {
    throw PreconditionError("optimal point needs finite endpoint derivatives");
  }
  if (!(B > A)) throw PreconditionError("optimal point needs f'-(b) > f'+(a)");
  if (A > 0.0 || B < 0.0) {
    throw PreconditionError("optimal point needs f'+(a) <= 0 <= f'-(b)");
  }
  OptimalPoint r;
  r.x0 = std::clamp((b * B - a * A) / (B - A), a, b);
  r.gap_upper = -0.5 * A * B * (b - a) * (b - a) / (B - A);
  return r;
}

std::string to_string(ClassicalKind kind) {
  switch (kind) {
    case ClassicalKind::bounded_variation: return "bounded_variation";
    case ClassicalKind::monotone: return "monotone";
    case ClassicalKind::lipschitz: return "lipschitz";
    case ClassicalKind::dnorm_inf: return "dnorm_inf";
    case ClassicalKind::dnorm_p: return "dnorm_p";
    case ClassicalKind::dnorm_1: return "dnorm_1";
  }
  return "unknown";
}

namespace {

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw PreconditionError(std::string("classical bound needs ") + name);
  if (!(*v >= 0.0)) throw PreconditionError(std::string(name) + " must be nonnegative");
  return *v;
}

}  // namespace

double classical_bound(const ConvexFunction& f, double x, const ClassicalConstants& c,
                       ClassicalKind kind) {
  require_closed(f, x);
  const Interval& d = f.domain();
  const double offset = x - d.midpoint();
  const double linear_factor = 0.5 * d.length() + std::abs(offset);
  const double quadratic_factor = 0.25 * d.length() * d.length() + offset * offset;

  switch (kind) {
    case ClassicalKind::bounded_variation:
      return linear_factor * need(c.total_variation, "total_variation");
    case ClassicalKind::monotone: {
      if (!c.monotone_nondecreasing) {
        throw PreconditionError("monotone bound needs f declared nondecreasing");
      }
      const double rise = f(d.b()) - f(d.a());
      if (rise < 0.0) throw PreconditionError("f(b) < f(a) contradicts monotonicity");
      return linear_factor * rise;
    }
    case ClassicalKind::lipschitz:
      return quadratic_factor * need(c.lipschitz, "lipschitz");
    case ClassicalKind::dnorm_inf:
      return quadratic_factor * need(c.dnorm_inf, "dnorm_inf");
    case ClassicalKind::dnorm_p: {
      const double norm = need(c.dnorm_p, "dnorm_p");
      if (!c.p || !(*c.p > 1.0)) throw PreconditionError("dnorm_p needs an exponent p > 1");
      const double q = *c.p / (*c.p - 1.0);
      const double spread =
          std::pow(x - d.a(), q + 1.0) + std::pow(d.b() - x, q + 1.0);
      return std::pow(spread / (q + 1.0), 1.0 / q) * norm;
    }
    case ClassicalKind::dnorm_1:
      return linear_factor * need(c.dnorm_1, "dnorm_1");
  }
  throw PreconditionError("unknown classical bound");
}

std::vector<NamedBound> classical_bounds(const ConvexFunction& f, double x,
                                         const ClassicalConstants& c) {
  std::vector<NamedBound> out;
  auto add = [&](ClassicalKind kind) { out.push_back({kind, classical_bound(f, x, c, kind)}); };
  if (c.total_variation) add(ClassicalKind::bounded_variation);
  if (c.monotone_nondecreasing) add(ClassicalKind::monotone);
  if (c.lipschitz) add(ClassicalKind::lipschitz);
  if (c.dnorm_inf) add(ClassicalKind::dnorm_inf);
  if (c.dnorm_p) add(ClassicalKind::dnorm_p);
  if (c.dnorm_1) add(ClassicalKind::dnorm_1);
  if (out.empty()) throw PreconditionError("classical bounds need at least one constant");
  return out;
}

}  // namespace cvxquad::pointwise
