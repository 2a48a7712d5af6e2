#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cvxquad/pointwise.hpp"
#include "oracles.hpp"

using namespace cvxquad;
using namespace cvxquad::pointwise;

TEST_CASE("gap agrees with the hand-derived integral") {
  for (const auto& c : oracle::catalog_cases()) {
    CAPTURE(c.name);
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    for (double s : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      const double x = c.a + s * (c.b - c.a);
      CHECK(oracle::close(gap(f, x), oracle::gap(c, x), 1e-12));
    }
  }
}

TEST_CASE("lower and upper bounds bracket the gap at random points") {
  std::mt19937_64 rng(11);
  for (const auto& c : oracle::catalog_cases()) {
    CAPTURE(c.name);
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    std::uniform_real_distribution<double> xs(c.a, c.b);
    for (int i = 0; i < 100; ++i) {
      const double x = xs(rng);
      if (!f.domain().interior(x)) continue;
      const Enclosure e = gap_enclosure(f, x);
      CHECK(e.contains(oracle::gap(c, x), 1e-9 * std::max(1.0, std::abs(oracle::gap(c, x)))));
    }
  }
}

TEST_CASE("kink at the midpoint attains both bounds") {
  const ConvexFunction f = catalog("kink", std::vector{1.0, 0.5}, Interval(0.0, 1.0));
  CHECK(lower_gap_bound(f, 0.5) == 0.25);
  CHECK(upper_gap_bound(f, 0.5) == 0.25);
  CHECK(gap(f, 0.5) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("lower bound needs an interior point, upper bound accepts endpoints") {
  const ConvexFunction f = catalog("exp", {}, Interval(0.0, 1.0));
  CHECK_THROWS_AS(lower_gap_bound(f, 0.0), DomainError);
  CHECK_THROWS_AS(lower_gap_bound(f, 1.0), DomainError);
  CHECK(upper_gap_bound(f, 0.0) == doctest::Approx(0.5 * std::exp(1.0)));
  CHECK(upper_gap_bound(f, 1.0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(upper_gap_bound(f, 1.5), DomainError);
}

TEST_CASE("infinite endpoint slope makes the upper bound infinite") {
  const ConvexFunction f = catalog("xlogx", {}, Interval(0.0, 1.0));
  CHECK(upper_gap_bound(f, 0.5) == std::numeric_limits<double>::infinity());
  // at x = a the weight on f'+(a) vanishes
  CHECK(std::isfinite(upper_gap_bound(f, 0.0)));
}

TEST_CASE("Hermite-Hadamard bounds contain the difference") {
  for (const auto& c : oracle::catalog_cases()) {
    CAPTURE(c.name);
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    const double want =
        0.5 * (c.value(c.a) + c.value(c.b)) - c.integral(c.a, c.b) / (c.b - c.a);
    CHECK(oracle::close(hh_difference(f), want, 1e-12));
    CHECK(hh_bounds(f).contains(want, 1e-12));
  }
  const ConvexFunction kink = catalog("kink", std::vector{2.0}, Interval(-1.0, 1.0));
  CHECK(hh_bounds(kink) == Enclosure(1.0, 1.0));
}

TEST_CASE("differentiable lower bound") {
  const ConvexFunction f = catalog("quadratic", {}, Interval(0.0, 2.0));
  // (b - a)((a + b)/2 - x) f'(x) at x = 0.5: 2 * 0.5 * 1
  CHECK(differentiable_lower(f, 0.5) == doctest::Approx(1.0));
  CHECK(differentiable_lower(f, 0.5) <= gap(f, 0.5));
  const ConvexFunction k = catalog("kink", {}, Interval(0.0, 2.0));
  CHECK_THROWS_AS(differentiable_lower(k, 1.0), NotDifferentiableError);
}

TEST_CASE("symmetric window inequality") {
  for (const auto& c : oracle::catalog_cases()) {
    CAPTURE(c.name);
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    const double x = c.a + 0.4 * (c.b - c.a);
    const auto r = window_inequality(f, x, 0.2 * (c.b - c.a));
    CHECK(r.holds);
    CHECK(r.lhs >= 0.0);
  }
  const ConvexFunction f = catalog("exp", {}, Interval(0.0, 1.0));
  CHECK_THROWS_AS(window_inequality(f, 0.1, 0.5), DomainError);
}

TEST_CASE("optimal split point minimises the upper bound") {
  const ConvexFunction f = catalog("quadratic", {}, Interval(-1.0, 2.0));
  const OptimalPoint op = optimal_point_bound(f);
  // A = -2, B = 4
  CHECK(op.x0 == doctest::Approx((2.0 * 4.0 - (-1.0) * (-2.0)) / 6.0));
  CHECK(op.gap_upper == doctest::Approx(0.5 * 2.0 * 4.0 * 9.0 / 6.0));
  CHECK(op.gap_upper == doctest::Approx(upper_gap_bound(f, op.x0)));
  for (double x = -1.0; x <= 2.0; x += 0.01) CHECK(upper_gap_bound(f, x) >= op.gap_upper - 1e-12);
}

TEST_CASE("optimal split point preconditions") {
  CHECK_THROWS_AS(optimal_point_bound(catalog("exp", {}, Interval(0.0, 1.0))), PreconditionError);
  CHECK_THROWS_AS(optimal_point_bound(catalog("linear", {}, Interval(0.0, 1.0))), PreconditionError);
  CHECK_THROWS_AS(optimal_point_bound(catalog("xlogx", {}, Interval(0.0, 2.0))), PreconditionError);
}

TEST_CASE("classical bounds dominate the gap when constants are valid") {
  const ConvexFunction f = catalog("quadratic", {}, Interval(-1.0, 2.0));
  ClassicalConstants c;
  c.total_variation = 5.0;  // 1 + 4
  c.lipschitz = 4.0;
  c.dnorm_inf = 4.0;  // norms of f' = 2t on [-1, 2]
  c.dnorm_1 = 5.0;
  c.dnorm_p = std::sqrt(12.0);
  c.p = 2.0;
  for (double x : {-0.5, 0.0, 0.7, 1.9}) {
    const double g = std::abs(gap(f, x));
    const auto bounds = classical_bounds(f, x, c);
    CHECK(bounds.size() == 5);
    for (const auto& b : bounds) {
      CAPTURE(to_string(b.kind));
      CHECK(g <= b.bound + 1e-12);
    }
  }
  CHECK_THROWS_AS(classical_bound(f, 0.0, c, ClassicalKind::monotone), PreconditionError);
  CHECK_THROWS_AS(classical_bounds(f, 0.0, ClassicalConstants{}), PreconditionError);
}

TEST_CASE("worked values for t^2 on [0, 1]") {
  const ConvexFunction f = catalog("quadratic", {}, Interval(0.0, 1.0));
  CHECK(gap(f, 0.5) == doctest::Approx(1.0 / 6));
  CHECK(gap(f, 0.25) == doctest::Approx(5.0 / 12));
  CHECK(lower_gap_bound(f, 0.25) == doctest::Approx(0.125));
  CHECK(upper_gap_bound(f, 0.5) == doctest::Approx(0.25));
  CHECK(gap_enclosure(f, 0.5) == Enclosure(0.0, 0.25));
  CHECK(hh_bounds(f) == Enclosure(0.0, 0.25));
  CHECK(hh_difference(f) == doctest::Approx(1.0 / 6));
  CHECK(differentiable_lower(f, 0.25) == doctest::Approx(0.125));
  CHECK(differentiable_lower(f, 0.5) == 0.0);
  const auto w = window_inequality(f, 0.5, 0.5);
  CHECK(w.lhs == 0.0);
  CHECK(w.rhs >= 0.0);
  CHECK(w.holds);

  ClassicalConstants c;
  c.lipschitz = 2.0;
  CHECK(classical_bound(f, 0.5, c, ClassicalKind::lipschitz) == doctest::Approx(0.5));
}

TEST_CASE("worked values for the unit kink") {
  const ConvexFunction f = catalog("kink", std::vector{1.0, 0.5}, Interval(0.0, 1.0));
  CHECK(gap_enclosure(f, 0.5) == Enclosure(0.25, 0.25));
  CHECK(hh_bounds(f) == Enclosure(0.25, 0.25));
  CHECK(hh_difference(f) == doctest::Approx(0.25));
  const auto w = window_inequality(f, 0.5, 1.0);
  CHECK(w.lhs == doctest::Approx(0.25));
  CHECK(w.rhs == doctest::Approx(0.25));
  const OptimalPoint op = optimal_point_bound(f);
  CHECK(op.x0 == 0.5);
  CHECK(op.gap_upper == 0.25);
  ClassicalConstants c;
  c.total_variation = 1.0;
  CHECK(classical_bound(f, 0.5, c, ClassicalKind::bounded_variation) == doctest::Approx(0.5));
}

TEST_CASE("t^2 - t has its optimal split point at the midpoint") {
  const ConvexFunction f(Interval(0.0, 1.0), [](double t) { return t * t - t; },
                         [](double t) { return 2 * t - 1; }, [](double t) { return 2 * t - 1; },
                         "t^2-t", [](double t) { return t * t * t / 3 - t * t / 2; });
  const OptimalPoint op = optimal_point_bound(f);
  CHECK(op.x0 == 0.5);
  CHECK(op.gap_upper == 0.25);
  CHECK(gap(f, 0.5) == doctest::Approx(1.0 / 6));
}

TEST_CASE("degenerate cases: constant and linear functions") {
  const ConvexFunction k = catalog("constant", std::vector{3.0}, Interval(0.0, 2.0));
  CHECK(gap(k, 0.7) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(gap_enclosure(k, 0.7) == Enclosure(0.0, 0.0));
  ClassicalConstants c;
  c.total_variation = 0.0;
  CHECK(classical_bound(k, 1.0, c, ClassicalKind::bounded_variation) == 0.0);

  const ConvexFunction lin = catalog("linear", std::vector{2.0, 1.0}, Interval(0.0, 1.0));
  CHECK(hh_bounds(lin) == Enclosure(0.0, 0.0));
  const auto w = window_inequality(lin, 0.5, 0.5);
  CHECK(w.lhs == 0.0);
  CHECK(w.rhs == doctest::Approx(0.0).epsilon(1e-15));
  for (double x : {0.1, 0.5, 0.8}) {
    CHECK(lower_gap_bound(lin, x) <= gap(lin, x) + 1e-12);
    CHECK(lower_gap_bound(lin, x) == doctest::Approx((0.5 - x) * 2.0));
  }
}

TEST_CASE("neg_log with an infinite slope at zero has an infinite upper bound") {
  const ConvexFunction f = catalog("neg_log", {}, Interval(0.0, 1.0));
  CHECK(upper_gap_bound(f, 0.5) == std::numeric_limits<double>::infinity());
}

TEST_CASE("properties over the catalog") {
  std::mt19937_64 rng(29);
  for (const auto& c : oracle::catalog_cases()) {
    CAPTURE(c.name);
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    CHECK(hh_bounds(f).lo() >= 0.0);
    std::uniform_real_distribution<double> xs(c.a, c.b);
    for (int i = 0; i < 50; ++i) {
      const double x = xs(rng);
      if (!f.domain().interior(x)) continue;
      if (f.derivative(x, Side::left) == f.derivative(x, Side::right)) {
        CHECK(oracle::close(differentiable_lower(f, x), lower_gap_bound(f, x), 1e-12));
      }
    }
  }
}

TEST_CASE("optimal split point beats a 1000-point grid") {
  for (const auto& [name, params, a, b] :
       {std::tuple{"quadratic", std::vector<double>{1.0, -0.5, 0.0}, -1.0, 2.0},
        std::tuple{"kink", std::vector<double>{2.0, 0.2}, -1.0, 1.0},
        std::tuple{"power_p", std::vector<double>{3.0}, -0.5, 2.0}}) {
    const ConvexFunction f = catalog(name, params, Interval(a, b));
    const OptimalPoint op = optimal_point_bound(f);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) best = std::min(best, upper_gap_bound(f, a + (b - a) * i / 1000.0));
    CHECK(op.gap_upper <= best + 1e-12);
    CHECK(best - op.gap_upper <= 1e-4 * std::max(1.0, best));
  }
}
