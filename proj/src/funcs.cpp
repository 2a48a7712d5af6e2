#include "cvxquad/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cvxquad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_in_domain(const Interval& d, double x, Side side) {
  if (!d.contains(x)) {
    throw DomainError("point " + fmt(x) + " outside [" + fmt(d.a()) + ", " + fmt(d.b()) + "]");
  }
  if (side == Side::left && x <= d.a()) {
    throw DomainError("left derivative undefined at the left endpoint " + fmt(x));
  }
  if (side == Side::right && x >= d.b()) {
    throw DomainError("right derivative undefined at the right endpoint " + fmt(x));
  }
}

// Largest power of two not exceeding v (v > 0).
double pow2_floor(double v) { return std::ldexp(1.0, std::ilogb(v)); }

double param(std::span<const double> p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

double sign(double t) { return (t > 0) - (t < 0); }

}  // namespace

Interval::Interval(double a, double b) : a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw DomainError("interval requires finite a < b, got [" + fmt(a) + ", " + fmt(b) + "]");
  }
}

std::string_view to_string(Side side) { return side == Side::left ? "left" : "right"; }

DerivativeEstimate finite_difference_derivative(const RealMap& f, const Interval& domain, double x,
                                                Side side, double h0, int levels, double tol) {
  require_in_domain(domain, x, side);
  if (!(h0 > 0.0)) throw PreconditionError("finite difference step h0 must be positive");
  if (levels < 2) throw PreconditionError("finite difference needs at least two levels");
  const double room = side == Side::right ? domain.b() - x : x - domain.a();
  if (h0 > room) {
    throw DomainError("finite difference step " + fmt(h0) + " leaves the domain at " + fmt(x));
  }

  const double fx = f(x);
  if (!std::isfinite(fx)) throw EvaluationError("non-finite value at " + fmt(x));

  std::vector<double> quotients;
  quotients.reserve(static_cast<std::size_t>(levels));
  double h = h0;
  double magnitude = std::abs(fx);
  for (int k = 0; k < levels; ++k, h *= 0.5) {
    const double t = side == Side::right ? std::min(x + h, domain.b()) : std::max(x - h, domain.a());
    const double ft = f(t);
    if (!std::isfinite(ft)) throw EvaluationError("non-finite value at " + fmt(t));
    magnitude = std::max(magnitude, std::abs(ft));
    // divide by the step actually taken, t - x, not the nominal h
    quotients.push_back(side == Side::right ? (ft - fx) / (t - x) : (fx - ft) / (x - t));
  }
  const double h_min = h0 * std::ldexp(1.0, -(levels - 1));

  // Right quotients shrink toward f'+(x), left quotients grow toward f'-(x).
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * magnitude / h_min;
  for (std::size_t k = 1; k < quotients.size(); ++k) {
    const double step = side == Side::right ? quotients[k] - quotients[k - 1]
                                            : quotients[k - 1] - quotients[k];
    const double allowed = tol * std::max({1.0, std::abs(quotients[k]), magnitude}) + roundoff;
    if (step > allowed) {
      throw ConvexityError("difference quotients at " + fmt(x) + " (" +
                           std::string(to_string(side)) + ") are not monotone");
    }
  }

  DerivativeEstimate est;
  est.value = quotients.back();
  est.side = side;
  est.uncertainty = std::abs(quotients.back() - quotients[quotients.size() - 2]);
  est.method = DerivativeEstimate::Method::finite_difference;
  return est;
}

ConvexFunction::ConvexFunction(Interval domain, RealMap evaluate, RealMap left_derivative,
                               RealMap right_derivative, std::string label,
                               std::optional<RealMap> antiderivative)
    : domain_(domain),
      evaluate_(std::move(evaluate)),
      left_(std::move(left_derivative)),
      right_(std::move(right_derivative)),
      antiderivative_(std::move(antiderivative)),
      label_(std::move(label)) {}

ConvexFunction ConvexFunction::from_values(Interval domain, RealMap evaluate, std::string label,
                                           FiniteDifferenceSettings fd) {
  if (fd.h0 <= 0.0) fd.h0 = pow2_floor(domain.length() / 256.0);
  ConvexFunction f(domain, std::move(evaluate), nullptr, nullptr, std::move(label));
  f.exact_derivatives_ = false;
  f.fd_ = fd;
  return f;
}

double ConvexFunction::operator()(double t) const {
  if (!domain_.contains(t)) {
    throw DomainError("point " + fmt(t) + " outside the domain of " + label_);
  }
  return evaluate_(t);
}

double ConvexFunction::derivative(double x, Side side) const {
  require_in_domain(domain_, x, side);
  if (exact_derivatives_) return side == Side::left ? left_(x) : right_(x);
  return derivative_estimate(x, side).value;
}

DerivativeEstimate ConvexFunction::derivative_estimate(double x, Side side) const {
  require_in_domain(domain_, x, side);
  if (exact_derivatives_) {
    return {side == Side::left ? left_(x) : right_(x), side, 0.0,
            DerivativeEstimate::Method::exact};
  }
  const double room = side == Side::right ? domain_.b() - x : x - domain_.a();
  double h0 = fd_.h0;
  while (h0 > room) h0 *= 0.5;
  return finite_difference_derivative(evaluate_, domain_, x, side, h0, fd_.levels, fd_.tol);
}

double ConvexFunction::integral(double u, double v) const {
  if (!antiderivative_) throw PreconditionError(label_ + " has no closed-form antiderivative");
  if (!domain_.contains(u) || !domain_.contains(v)) {
    throw DomainError("integration limits outside the domain of " + label_);
  }
  return (*antiderivative_)(v) - (*antiderivative_)(u);
}

ConvexFunction ConvexFunction::restricted(const Interval& sub) const {
  if (sub.a() < domain_.a() || sub.b() > domain_.b()) {
    throw DomainError("restriction leaves the domain of " + label_);
  }
  ConvexFunction g = *this;
  g.domain_ = sub;
  if (!exact_derivatives_) {
    g.fd_.h0 = std::min(g.fd_.h0, pow2_floor(sub.length() / 4.0));
  }
  return g;
}

double one_sided_derivative(const ConvexFunction& f, double x, Side side) {
  return f.derivative(x, side);
}

ConvexityReport check_convexity(const RealMap& f, const Interval& domain, int gridpoints,
                                double tol) {
  if (gridpoints < 3) throw PreconditionError("convexity check needs at least 3 grid points");
  const auto n = static_cast<std::size_t>(gridpoints);
  std::vector<double> t(n), v(n);
  double magnitude = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = i + 1 == n ? domain.b()
                      : domain.a() + domain.length() * static_cast<double>(i) / (n - 1);
    v[i] = f(t[i]);
    if (!std::isfinite(v[i])) throw EvaluationError("non-finite value at " + fmt(t[i]));
    magnitude = std::max(magnitude, std::abs(v[i]));
  }

  ConvexityReport report;
  report.threshold = tol * magnitude * (n - 1) / domain.length();
  report.worst_violation = -kInf;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double s1 = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
    const double s2 = (v[i + 2] - v[i + 1]) / (t[i + 2] - t[i + 1]);
    if (s1 - s2 > report.worst_violation) {
      report.worst_violation = s1 - s2;
      report.witness = {t[i], t[i + 1], t[i + 2]};
    }
  }
  report.passed = report.worst_violation <= report.threshold;
  return report;
}

ConvexityReport check_convexity(const ConvexFunction& f, int gridpoints, double tol) {
  return check_convexity([&f](double t) { return f(t); }, f.domain(), gridpoints, tol);
}

ConvexFunction catalog(std::string_view name, std::span<const double> params,
                       const Interval& domain) {
  const std::string label(name);

  if (name == "kink") {
    const double k = param(params, 0, 1.0);
    const double c = param(params, 1, domain.midpoint());
    if (!(k >= 0.0)) throw PreconditionError("kink requires k >= 0");
    return ConvexFunction(
        domain, [k, c](double t) { return k * std::abs(t - c); },
        [k, c](double t) { return t <= c ? -k : k; },
        [k, c](double t) { return t < c ? -k : k; }, label,
        [k, c](double t) { return 0.5 * k * (t - c) * std::abs(t - c); });
  }
  if (name == "quadratic") {
    const double c2 = param(params, 0, 1.0);
    const double c1 = param(params, 1, 0.0);
    const double c0 = param(params, 2, 0.0);
    if (!(c2 >= 0.0)) throw PreconditionError("quadratic requires a nonnegative leading coefficient");
    auto d = [c2, c1](double t) { return 2.0 * c2 * t + c1; };
    return ConvexFunction(
        domain, [c2, c1, c0](double t) { return (c2 * t + c1) * t + c0; }, d, d, label,
        [c2, c1, c0](double t) { return ((c2 / 3.0 * t + c1 / 2.0) * t + c0) * t; });
  }
  if (name == "exp") {
    auto e = [](double t) { return std::exp(t); };
    return ConvexFunction(domain, e, e, e, label, e);
  }
  if (name == "neg_log") {
    if (domain.a() < 0.0) throw PreconditionError("neg_log requires a domain in [0, inf)");
    auto d = [](double t) { return t == 0.0 ? -kInf : -1.0 / t; };
    return ConvexFunction(
        domain, [](double t) { return t == 0.0 ? kInf : -std::log(t); }, d, d, label,
        [](double t) { return t == 0.0 ? 0.0 : t - t * std::log(t); });
  }
  if (name == "xlogx") {
    if (domain.a() < 0.0) throw PreconditionError("xlogx requires a domain in [0, inf)");
    auto d = [](double t) { return t == 0.0 ? -kInf : std::log(t) + 1.0; };
    return ConvexFunction(
        domain, [](double t) { return t == 0.0 ? 0.0 : t * std::log(t); }, d, d, label,
        [](double t) { return t == 0.0 ? 0.0 : t * t * (0.5 * std::log(t) - 0.25); });
  }
  if (name == "power_p") {
    if (params.empty()) throw PreconditionError("power_p requires the exponent p");
    const double p = params[0];
    if (!(p >= 1.0)) throw PreconditionError("power_p requires p >= 1");
    auto slope = [p](double t) { return p * sign(t) * std::pow(std::abs(t), p - 1.0); };
    return ConvexFunction(
        domain, [p](double t) { return std::pow(std::abs(t), p); },
        [p, slope](double t) { return t == 0.0 ? (p == 1.0 ? -1.0 : 0.0) : slope(t); },
        [p, slope](double t) { return t == 0.0 ? (p == 1.0 ? 1.0 : 0.0) : slope(t); }, label,
        [p](double t) { return sign(t) * std::pow(std::abs(t), p + 1.0) / (p + 1.0); });
  }
  if (name == "linear") {
    const double m = param(params, 0, 1.0);
    const double c = param(params, 1, 0.0);
    auto d = [m](double) { return m; };
    return ConvexFunction(
        domain, [m, c](double t) { return m * t + c; }, d, d, label,
        [m, c](double t) { return (0.5 * m * t + c) * t; });
  }
  if (name == "constant") {
    const double c = param(params, 0, 0.0);
    auto d = [](double) { return 0.0; };
    return ConvexFunction(
        domain, [c](double) { return c; }, d, d, label, [c](double t) { return c * t; });
  }
  throw PreconditionError("unknown catalog function '" + label + "'");
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"kink",  "quadratic", "exp",    "neg_log",
                                              "xlogx", "power_p",   "linear", "constant"};
  return names;
}

}  // namespace cvxquad
