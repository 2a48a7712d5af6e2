#include "cvxquad/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cvxquad/quadrature.hpp"

namespace cvxquad::divergence {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCoincident = 1e-14;

void require_same_support(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) {
    throw PreconditionError("distributions have different support sizes (" +
                            std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
}

double slope_at_infinity(const GeneratorFunction& f, std::size_t i) {
  if (!f.slope_at_infinity) {
    throw UndefinedDivergenceError("p vanishes where q does not (index " + std::to_string(i) +
                                   ") and " + f.label + " has no finite slope at infinity");
  }
  return *f.slope_at_infinity;
}

double csiszar_raw(const GeneratorFunction& f, std::span<const double> p,
                   std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      if (q[i] > 0.0) total += q[i] * slope_at_infinity(f, i);
      continue;
    }
    total += p[i] * f.evaluate(q[i] / p[i]);
  }
  return total;
}

// The only one-sided derivative that exists at u = 0 is the right one.
double left_or_limit(const GeneratorFunction& f, double u) {
  return u == 0.0 ? f.right_derivative(0.0) : f.left_derivative(u);
}

Enclosure ordered(double lo, double hi) {
  if (lo > hi && lo - hi > 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)})) {
    throw ConvexityError("divergence gap bounds cross: the generator is not convex");
  }
  return Enclosure::hull(lo, hi);
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> weights, double tol)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw PreconditionError("distribution needs at least one weight");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      throw PreconditionError("weight " + std::to_string(i) + " is negative or not finite");
    }
  }
  const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(sum - 1.0) > tol) {
    throw PreconditionError("weights sum to " + std::to_string(sum) + ", not 1");
  }
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw PreconditionError("cannot normalise weights with sum " + std::to_string(sum));
  }
  for (double& w : weights) w /= sum;
  return DiscreteDistribution(std::move(weights), 1e-9);
}

ConvexFunction GeneratorFunction::on(const Interval& iv, bool with_antiderivative) const {
  if (iv.a() < 0.0) throw DomainError("generators are defined on [0, inf)");
  std::optional<RealMap> anti;
  if (with_antiderivative) anti = antiderivative;
  return ConvexFunction(iv, evaluate, left_derivative, right_derivative, label, anti);
}

GeneratorFunction generator(std::string_view name) {
  if (name == "chi_squared" || name == "chi2") {
    auto d = [](double u) { return 2.0 * (u - 1.0); };
    return {"chi_squared", [](double u) { return (u - 1.0) * (u - 1.0); }, d, d,
            [](double u) { return (u - 1.0) * (u - 1.0) * (u - 1.0) / 3.0; }, std::nullopt};
  }
  if (name == "kl") {
    // u ln u - u + 1: the linear shift makes f'(1) = 0 and cancels in every
    // divergence because sum (q - p) = 0
    auto d = [](double u) { return u == 0.0 ? -kInf : std::log(u); };
    return {"kl", [](double u) { return u == 0.0 ? 1.0 : u * std::log(u) - u + 1.0; }, d, d,
            [](double u) {
              return u == 0.0 ? 0.0 : u * u * (0.5 * std::log(u) - 0.75) + u;
            },
            std::nullopt};
  }
  if (name == "total_variation" || name == "tv") {
    return {"total_variation", [](double u) { return std::abs(u - 1.0); },
            [](double u) { return u <= 1.0 ? -1.0 : 1.0; },
            [](double u) { return u < 1.0 ? -1.0 : 1.0; },
            [](double u) { return 0.5 * (u - 1.0) * std::abs(u - 1.0); }, 1.0};
  }
  if (name == "hellinger") {
    auto d = [](double u) { return u == 0.0 ? -kInf : 1.0 - 1.0 / std::sqrt(u); };
    return {"hellinger",
            [](double u) {
              const double s = std::sqrt(u) - 1.0;
              return s * s;
            },
            d, d, [](double u) { return u * (0.5 * u - 4.0 / 3.0 * std::sqrt(u) + 1.0); }, 1.0};
  }
  throw PreconditionError("unknown generator '" + std::string(name) + "'");
}

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"chi_squared", "kl", "total_variation",
                                              "hellinger"};
  return names;
}

GeneratorReport check_generator(const GeneratorFunction& f, double hi) {
  GeneratorReport r;
  r.normalized = std::abs(f.evaluate(1.0)) <= 1e-12;
  r.convex = check_convexity(f.evaluate, Interval(0.0, hi), 1001).passed;
  r.derivatives_ok = f.left_derivative(1.0) <= 1e-12 && f.right_derivative(1.0) >= -1e-12 &&
                     f.left_derivative(1.0) <= f.right_derivative(1.0);
  return r;
}

double csiszar(const GeneratorFunction& f, const DiscreteDistribution& p,
               const DiscreteDistribution& q) {
  require_same_support(p, q);
  return csiszar_raw(f, p.weights(), q.weights());
}

double lin_wong(const GeneratorFunction& f, const DiscreteDistribution& p,
                const DiscreteDistribution& q) {
  require_same_support(p, q);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return csiszar_raw(f, p.weights(), m);
}

HhResult hh_divergence(const GeneratorFunction& f, const DiscreteDistribution& p,
                       const DiscreteDistribution& q, const HhOptions& options) {
  require_same_support(p, q);
  if (!(options.eps > 0.0)) throw PreconditionError("hh_divergence needs eps > 0");
  const double term_eps = options.eps / static_cast<double>(p.size());

  HhResult out;
  out.value = Enclosure::point(0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    const double qi = q[i];
    if (pi == 0.0) {
      if (qi > 0.0) out.value += Enclosure::point(0.5 * qi * slope_at_infinity(f, i));
      continue;
    }
    if (std::abs(qi - pi) <= kCoincident * pi) continue;

    const double r = qi / pi;
    const double lo = std::min(1.0, r);
    const double hi = std::max(1.0, r);
    // p^2/(q - p) and integral_1^r flip sign together.
    const double factor = pi * pi / std::abs(qi - pi);
    if (options.use_closed_form && f.antiderivative) {
      const RealMap& F = *f.antiderivative;
      out.value += Enclosure::point(factor * (F(hi) - F(lo)));
      continue;
    }
    const quad::QuadratureResult inner = quad::adaptive_integrate(
        f.on(Interval(lo, hi), false), term_eps / factor, options.max_cells);
    out.converged = out.converged && inner.converged;
    out.value += inner.integral.scaled(factor);
  }
  return out;
}

SandwichReport sandwich_report(const GeneratorFunction& f, const DiscreteDistribution& p,
                               const DiscreteDistribution& q, const HhOptions& options,
                               double slack) {
  SandwichReport r;
  r.lin_wong = lin_wong(f, p, q);
  const HhResult hh = hh_divergence(f, p, q, options);
  r.hh = hh.value;
  r.converged = hh.converged;
  r.half_csiszar = 0.5 * csiszar(f, p, q);
  r.holds = r.lin_wong <= r.hh.hi() + slack && r.hh.lo() <= r.half_csiszar + slack;
  return r;
}

Enclosure gap_enclosure(const GeneratorFunction& f, const DiscreteDistribution& p,
                        const DiscreteDistribution& q) {
  require_same_support(p, q);
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    const double qi = q[i];
    if (pi == 0.0) {
      if (qi > 0.0) hi += 0.125 * slope_at_infinity(f, i) * qi;
      continue;
    }
    const double diff = qi - pi;
    if (diff == 0.0) continue;
    const double mid = (pi + qi) / (2.0 * pi);
    lo += 0.125 * (f.right_derivative(mid) - f.left_derivative(mid)) * std::abs(diff);
    hi += 0.125 * left_or_limit(f, qi / pi) * diff;
  }
  return ordered(lo, hi);
}

double gap_upper_unreduced(const GeneratorFunction& f, const DiscreteDistribution& p,
                           const DiscreteDistribution& q) {
  require_same_support(p, q);
  const double at_one = f.right_derivative(1.0);
  double hi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    const double qi = q[i];
    if (pi == 0.0) {
      if (qi > 0.0) hi += 0.125 * (slope_at_infinity(f, i) - at_one) * qi;
      continue;
    }
    hi += 0.125 * (left_or_limit(f, qi / pi) - at_one) * (qi - pi);
  }
  return hi;
}

}  // namespace cvxquad::divergence
