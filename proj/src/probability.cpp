#include "cvxquad/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "cvxquad/quadrature.hpp"

namespace cvxquad::prob {
namespace {

constexpr std::size_t kCdfCells = 1u << 16;
constexpr std::size_t kMassCells = 1u << 16;
constexpr std::size_t kMomentCells = 1u << 14;

double grid_point(const Interval& d, std::size_t i, std::size_t n) {
  return i == n ? d.b() : d.a() + d.length() * static_cast<double>(i) / static_cast<double>(n);
}

}  // namespace

MonotoneDensity::MonotoneDensity(Interval domain, RealMap evaluate, RealMap left_limit,
                                 RealMap right_limit, std::string label,
                                 std::optional<RealMap> cdf)
    : domain_(domain),
      evaluate_(std::move(evaluate)),
      left_(std::move(left_limit)),
      right_(std::move(right_limit)),
      cdf_(std::move(cdf)),
      label_(std::move(label)),
      table_(std::make_shared<CdfTable>()) {}

MonotoneDensity MonotoneDensity::continuous(Interval domain, RealMap evaluate, std::string label,
                                            std::optional<RealMap> cdf) {
  RealMap limit = evaluate;
  return MonotoneDensity(domain, evaluate, limit, limit, std::move(label), std::move(cdf));
}

double MonotoneDensity::operator()(double t) const {
  if (!domain_.contains(t)) throw DomainError("density evaluated outside its support");
  return evaluate_(t);
}

double MonotoneDensity::limit(double x, Side side) const {
  if (!domain_.contains(x)) throw DomainError("density limit outside its support");
  if (side == Side::left && x <= domain_.a()) {
    throw DomainError("left limit undefined at the left end of the support");
  }
  if (side == Side::right && x >= domain_.b()) {
    throw DomainError("right limit undefined at the right end of the support");
  }
  return side == Side::left ? left_(x) : right_(x);
}

struct MonotoneDensity::CdfTable {
  std::once_flag once;
  std::vector<double> cumulative;  // F at the grid nodes
};

// Cell [t_i, t_i+1] contributes h/2 (f(t_i+) + f(t_i+1 -)), so a jump on a
// node is integrated exactly.
const std::vector<double>& MonotoneDensity::table() const {
  std::call_once(table_->once, [this] {
    auto& c = table_->cumulative;
    c.assign(kCdfCells + 1, 0.0);
    for (std::size_t i = 0; i < kCdfCells; ++i) {
      const double u = grid_point(domain_, i, kCdfCells);
      const double v = grid_point(domain_, i + 1, kCdfCells);
      c[i + 1] = c[i] + 0.5 * (v - u) * (right_(u) + left_(v));
    }
  });
  return table_->cumulative;
}

double MonotoneDensity::cdf(double x) const {
  if (!domain_.contains(x)) throw DomainError("cdf evaluated outside the support");
  if (cdf_) return (*cdf_)(x) - (*cdf_)(domain_.a());
  if (x == domain_.a()) return 0.0;
  const auto& c = table();
  const double pos = (x - domain_.a()) / domain_.length() * static_cast<double>(kCdfCells);
  auto k = std::min(static_cast<std::size_t>(pos), kCdfCells - 1);
  double u = grid_point(domain_, k, kCdfCells);
  if (u > x) u = grid_point(domain_, --k, kCdfCells);
  if (u == x) return c[k];
  return c[k] + 0.5 * (x - u) * (right_(u) + left_(x));
}

ConvexFunction MonotoneDensity::cdf_function() const {
  auto self = *this;
  return ConvexFunction(
      domain_, [self](double x) { return self.cdf(x); },
      [self](double x) { return self.left_(x); }, [self](double x) { return self.right_(x); },
      "cdf of " + label_);
}

DensityReport validate_density(const MonotoneDensity& d, int gridpoints, double tol) {
  if (gridpoints < 3) throw PreconditionError("density check needs at least 3 grid points");
  const auto n = static_cast<std::size_t>(gridpoints - 1);
  const Interval& iv = d.domain();
  DensityReport report;

  double scale = 1.0;
  std::vector<double> left(n + 1), right(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = grid_point(iv, i, n);
    left[i] = i == 0 ? d.limit(t, Side::right) : d.limit(t, Side::left);
    right[i] = i == n ? d.limit(t, Side::left) : d.limit(t, Side::right);
    const double value = d(t);
    if (!std::isfinite(left[i]) || !std::isfinite(right[i]) || !std::isfinite(value)) {
      throw EvaluationError("density is not finite at " + std::to_string(t));
    }
    scale = std::max({scale, std::abs(left[i]), std::abs(right[i])});
    if (std::min({left[i], right[i], value}) < -tol) {
      if (report.nonnegative) {
        report.problems.push_back("density is negative at " + std::to_string(t));
      }
      report.nonnegative = false;
    }
  }
  for (std::size_t i = 0; i <= n; ++i) {
    const bool jump_down = left[i] > right[i] + tol * scale;
    const bool falls = i < n && right[i] > left[i + 1] + tol * scale;
    if ((jump_down || falls) && report.monotone) {
      report.problems.push_back("density decreases near " +
                                std::to_string(grid_point(iv, i, n)));
      report.monotone = false;
    }
  }

  if (d.has_cdf()) {
    report.mass = Enclosure::point(d.cdf(iv.b()));
  } else {
    const double h = iv.length() / static_cast<double>(kMassCells);
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t i = 0; i < kMassCells; ++i) {
      lower += h * d.limit(grid_point(iv, i, kMassCells), Side::right);
      upper += h * d.limit(grid_point(iv, i + 1, kMassCells), Side::left);
    }
    report.mass = Enclosure::hull(lower, upper);
  }
  if (report.mass.lo() > 1.0 + tol || report.mass.hi() < 1.0 - tol) {
    report.normalized = false;
    report.problems.push_back("total mass " + std::to_string(report.mass.midpoint()) +
                              " differs from 1");
  }
  return report;
}

double expectation_lower(const MonotoneDensity& d, double x) {
  const Interval& iv = d.domain();
  if (!iv.interior(x)) throw DomainError("lower expectation bound needs x strictly inside");
  const double r = iv.b() - x;
  const double l = x - iv.a();
  return x + 0.5 * (r * r * d.limit(x, Side::right) - l * l * d.limit(x, Side::left));
}

double expectation_upper(const MonotoneDensity& d, double x) {
  const Interval& iv = d.domain();
  if (!iv.contains(x)) throw DomainError("upper expectation bound needs x in the support");
  const double r = iv.b() - x;
  const double l = x - iv.a();
  double u = 0.0;
  if (r > 0.0) u += r * r * d.limit(iv.b(), Side::left);
  if (l > 0.0) u -= l * l * d.limit(iv.a(), Side::right);
  return x + 0.5 * u;
}

ExpectationEnclosure expectation_enclosure(const MonotoneDensity& d, double x) {
  return {expectation_lower(d, x), expectation_upper(d, x), x, x};
}

ExpectationEnclosure midpoint_expectation_enclosure(const MonotoneDensity& d) {
  return expectation_enclosure(d, d.domain().midpoint());
}

ExpectationEnclosure best_expectation_enclosure(const MonotoneDensity& d, int gridpoints) {
  if (gridpoints < 3) throw PreconditionError("expectation search needs at least 3 grid points");
  const auto n = static_cast<std::size_t>(gridpoints - 1);
  ExpectationEnclosure best;
  best.lo = -std::numeric_limits<double>::infinity();
  best.hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = grid_point(d.domain(), i, n);
    if (i > 0 && i < n) {
      const double lo = expectation_lower(d, x);
      if (lo > best.lo) {
        best.lo = lo;
        best.x_lower = x;
      }
    }
    const double hi = expectation_upper(d, x);
    if (hi < best.hi) {
      best.hi = hi;
      best.x_upper = x;
    }
  }
  return best;
}

ExpectationCrossCheck expectation_cross_check(const MonotoneDensity& d, double eps) {
  const Interval& iv = d.domain();
  ExpectationCrossCheck out;

  // Composite Simpson on t f(t).
  const double h = iv.length() / static_cast<double>(kMomentCells);
  auto g = [&](double t) { return t * d(t); };
  double sum = g(iv.a()) + g(iv.b());
  for (std::size_t i = 1; i < kMomentCells; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * g(grid_point(iv, i, kMomentCells));
  }
  out.via_density = sum * h / 3.0;

  const quad::QuadratureResult r = quad::adaptive_integrate(d.cdf_function(), eps);
  out.via_cdf = Enclosure::hull(iv.b() - r.integral.hi(), iv.b() - r.integral.lo());
  return out;
}

}  // namespace cvxquad::prob
