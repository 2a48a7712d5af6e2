// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvxquad/divergence.hpp"
#include "cvxquad/expr.hpp"
#include "cvxquad/funcs.hpp"
#include "cvxquad/pointwise.hpp"
#include "cvxquad/probability.hpp"
#include "cvxquad/quadrature.hpp"
#include "oracles.hpp"

using namespace cvxquad;
namespace dv = cvxquad::divergence;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Outcome sharpness() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> k_dist(0.0, 10.0), a_dist(-5.0, 5.0), len_dist(0.01, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    double k = k_dist(rng);
    if (k == 0.0) k = 10.0;
    const double a = a_dist(rng), b = a + len_dist(rng);
    const double m = 0.5 * (a + b);
    const ConvexFunction f = catalog("kink", std::vector{k, m}, Interval(a, b));
    const double want = 0.25 * k * (b - a) * (b - a);
    for (double got : {pointwise::lower_gap_bound(f, m), pointwise::upper_gap_bound(f, m),
                       pointwise::gap(f, m)}) {
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, want));
    }
  }
  return {worst <= 1e-12, "20 cases, max rel err " + fmt(worst)};
}

Outcome sandwich() {
  std::mt19937_64 rng(202);
  const auto t0 = Clock::now();
  int violations = 0;
  for (const auto& c : oracle::catalog_cases()) {
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    std::uniform_real_distribution<double> xs(c.a, c.b);
    for (int i = 0; i < 200; ++i) {
      double x = xs(rng);
      if (x == c.a) continue;
      const double g = oracle::gap(c, x);
      const double slack = 1e-9 * std::max(1.0, std::abs(g));
      if (!(pointwise::lower_gap_bound(f, x) <= g + slack)) ++violations;
      if (!(g <= pointwise::upper_gap_bound(f, x) + slack)) ++violations;
    }
  }
  const double dt = seconds_since(t0);
  return {violations == 0 && dt < 1.0,
          "8 functions x 200 points, " + std::to_string(violations) + " violations, " + fmt(dt) + " s"};
}

Outcome hh_refinement() {
  int violations = 0;
  for (const auto& c : oracle::catalog_cases()) {
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    const double want = 0.5 * (c.value(c.a) + c.value(c.b)) - c.integral(c.a, c.b) / (c.b - c.a);
    if (!pointwise::hh_bounds(f).contains(want, 1e-9 * std::max(1.0, std::abs(want)))) ++violations;
  }
  const double k = 3.0, a = -1.0, b = 2.5;
  const Enclosure kink = pointwise::hh_bounds(catalog("kink", std::vector{k, 0.5 * (a + b)}, Interval(a, b)));
  const double target = 0.25 * k * (b - a);
  const bool kink_ok = std::abs(kink.lo() - target) <= 1e-12 && std::abs(kink.hi() - target) <= 1e-12;
  const Enclosure lin = pointwise::hh_bounds(catalog("linear", std::vector{2.0, -1.0}, Interval(a, b)));
  const bool linear_ok = lin.lo() == 0.0 && lin.hi() == 0.0;
  return {violations == 0 && kink_ok && linear_ok,
          "catalog violations " + std::to_string(violations) + ", kink [" + fmt(kink.lo()) + ", " +
              fmt(kink.hi()) + "] vs " + fmt(target) + ", linear [" + fmt(lin.lo()) + ", " +
              fmt(lin.hi()) + "]"};
}

Outcome composite_order() {
  const ConvexFunction f = catalog("exp", {}, Interval(0.0, 1.0));
  const double truth = std::numbers::e - 1.0;
  bool contained = true;
  std::vector<double> width(65, 0.0);
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto r = quad::integrate(f, quad::uniform_partition(f.domain(), n, quad::XiRule::midpoint));
    width[n] = r.integral.width();
    if (n <= 32 && !r.integral.contains(truth)) contained = false;
  }
  bool ratios = true;
  std::string detail;
  for (std::size_t n = 8; n <= 32; ++n) {
    const double ratio = width[2 * n] / width[n];
    if (std::abs(ratio - 0.25) > 0.05) ratios = false;
    if (n == 8 || n == 16 || n == 32) detail += " r(" + std::to_string(n) + ")=" + fmt(ratio);
  }
  const auto r4 = quad::integrate(f, quad::uniform_partition(f.domain(), 4, quad::XiRule::midpoint));
  const bool n4 = Enclosure(1.71379, 1.72723).contains(r4.integral);
  return {contained && ratios && n4,
          std::string("containment ") + (contained ? "ok" : "FAILED") + "," + detail + ", n=4 [" +
              fmt(r4.integral.lo()) + ", " + fmt(r4.integral.hi()) + "]"};
}

Outcome adaptive() {
  struct Case {
    const char* name;
    std::vector<double> params;
    double truth;
  };
  const std::vector<Case> cases{{"exp", {}, std::numbers::e - 1.0},
                                {"xlogx", {}, -0.25},
                                {"quadratic", {}, 1.0 / 3.0}};
  bool ok = true;
  std::string detail;
  const auto t0 = Clock::now();
  for (const auto& c : cases) {
    const auto r = quad::adaptive_integrate(catalog(c.name, c.params, Interval(0.0, 1.0)), 1e-6);
    const bool good = r.converged && r.integral.width() <= 1e-6 && r.integral.contains(c.truth) &&
                      r.cells <= 10000;
    ok = ok && good;
    detail += std::string(c.name) + ": width " + fmt(r.integral.width()) + ", " +
              std::to_string(r.cells) + " cells" + (good ? "" : " (FAILED)") + "; ";
  }
  const double dt = seconds_since(t0);
  return {ok && dt < 1.0, detail + fmt(dt) + " s"};
}

Outcome specialization() {
  double worst = 0.0;
  int mismatched_infinities = 0;
  for (const auto& c : oracle::catalog_cases()) {
    const ConvexFunction f = catalog(c.name, c.params, Interval(c.a, c.b));
    for (std::size_t n = 1; n <= 32; ++n) {
      const auto p = quad::uniform_partition(f.domain(), n, quad::XiRule::midpoint);
      const Enclosure general = quad::remainder_enclosure(f, p);
      const Enclosure special = quad::trapezoid_remainder_enclosure(f, p);
      for (auto [g, s] : {std::pair{general.lo(), special.lo()}, std::pair{general.hi(), special.hi()}}) {
        if (std::isinf(g) || std::isinf(s)) {
          if (g != s) ++mismatched_infinities;
          continue;
        }
        worst = std::max(worst, std::abs(g - s) / std::max(1.0, std::abs(g)));
      }
    }
  }
  return {worst <= 1e-12 && mismatched_infinities == 0,
          "catalog x n=1..32, max rel diff " + fmt(worst) + ", infinite mismatches " +
              std::to_string(mismatched_infinities)};
}

Outcome expectation() {
  const Interval unit(0.0, 1.0);
  const auto linear = prob::MonotoneDensity::continuous(unit, [](double t) { return 2.0 * t; }, "2t");
  const auto e1 = prob::midpoint_expectation_enclosure(linear);
  const bool linear_ok = e1.lo == 0.5 && e1.hi == 0.75 && e1.lo <= 2.0 / 3.0 && 2.0 / 3.0 <= e1.hi;

  const auto uniform = prob::MonotoneDensity::continuous(unit, [](double) { return 1.0; }, "1");
  const auto e2 = prob::midpoint_expectation_enclosure(uniform);
  const bool uniform_ok = e2.lo == 0.5 && e2.hi == 0.5;

  auto step = [](double t) { return t < 0.5 ? 0.0 : 2.0; };
  const prob::MonotoneDensity jump(
      unit, step, [](double t) { return t <= 0.5 ? 0.0 : 2.0; },
      [](double t) { return t < 0.5 ? 0.0 : 2.0; }, "step");
  const auto e3 = prob::midpoint_expectation_enclosure(jump);
  const bool step_ok = e3.lo == 0.75 && e3.hi == 0.75;

  return {linear_ok && uniform_ok && step_ok,
          "2t [" + fmt(e1.lo) + ", " + fmt(e1.hi) + "], uniform [" + fmt(e2.lo) + ", " + fmt(e2.hi) +
              "], step [" + fmt(e3.lo) + ", " + fmt(e3.hi) + "]"};
}

Outcome divergences() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<std::size_t> sizes(1, 50);
  const auto t0 = Clock::now();
  const dv::GeneratorFunction chi2 = dv::generator("chi2");
  double worst = 0.0;
  int failures = 0;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> corpus;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = sizes(rng);
    auto pw = oracle::random_distribution(rng, n);
    auto qw = oracle::random_distribution(rng, n);
    corpus.emplace_back(pw, qw);
    const dv::DiscreteDistribution p(pw), q(qw);
    const double x2 = oracle::chi_squared(pw, qw);
    const double scale = std::max(1.0, x2);
    const double df = dv::csiszar(chi2, p, q);
    const double lw = dv::lin_wong(chi2, p, q);
    const Enclosure hh = dv::hh_divergence(chi2, p, q).value;
    worst = std::max({worst, std::abs(df - x2) / scale, std::abs(lw - x2 / 4) / scale});
    if (!hh.contains(x2 / 3, 1e-10 * scale)) ++failures;
    worst = std::max(worst, hh.width() / scale);
  }
  for (const auto& name : dv::generator_names()) {
    const dv::GeneratorFunction f = dv::generator(name);
    for (const auto& [pw, qw] : corpus) {
      const dv::DiscreteDistribution p(pw), q(qw);
      const auto s = dv::sandwich_report(f, p, q);
      if (!s.holds) ++failures;
      const Enclosure g = dv::gap_enclosure(f, p, q);
      const double slack = 1e-9 * std::max(1.0, s.half_csiszar);
      // the true gap lies in [half - hh.hi, half - hh.lo]; it must meet g
      if (s.half_csiszar - s.hh.hi() > g.hi() + slack || s.half_csiszar - s.hh.lo() < g.lo() - slack) {
        ++failures;
      }
    }
  }
  const dv::DiscreteDistribution p(std::vector<double>{0.5, 0.5}), q(std::vector<double>{0.25, 0.75});
  const auto s = dv::sandwich_report(chi2, p, q);
  const Enclosure g = dv::gap_enclosure(chi2, p, q);
  const double gap = s.half_csiszar - s.hh.midpoint();
  const bool spot = std::abs(s.lin_wong - 0.0625) <= 1e-12 && std::abs(s.hh.midpoint() - 1.0 / 12) <= 1e-12 &&
                    std::abs(s.half_csiszar - 0.125) <= 1e-12 && s.holds &&
                    std::abs(gap - 1.0 / 24) <= 1e-12 && g.contains(gap) &&
                    std::abs(g.lo()) <= 1e-15 && std::abs(g.hi() - 0.0625) <= 1e-12;
  const double dt = seconds_since(t0);
  return {worst <= 1e-10 && failures == 0 && spot && dt < 2.0,
          "chi2 max rel err " + fmt(worst) + ", failures " + std::to_string(failures) + ", spot " +
              fmt(s.lin_wong) + " <= " + fmt(s.hh.midpoint()) + " <= " + fmt(s.half_csiszar) +
              ", gap " + fmt(gap) + " in [" + fmt(g.lo()) + ", " + fmt(g.hi()) + "], " + fmt(dt) + " s"};
}

Outcome parser() {
  int round_trip_failures = 0;
  double worst_derivative = 0.0;
  const Interval domain(oracle::kCorpusA, oracle::kCorpusB);
  for (const auto& entry : oracle::expression_corpus()) {
    const auto e = expr::parse(entry.text);
    if (!(expr::parse(expr::to_string(e)) == e)) ++round_trip_failures;
    if (!entry.smooth) continue;
    const auto d = expr::derivative(e);
    for (int i = 0; i <= 20; ++i) {
      const double t = domain.a() + 0.05 + (domain.length() - 0.1) * i / 20.0;
      const double fd = oracle::central_difference(entry.value, t);
      worst_derivative = std::max(worst_derivative,
                                  std::abs(expr::evaluate(d, t) - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return {round_trip_failures == 0 && worst_derivative <= 1e-6,
          "30 expressions, round-trip failures " + std::to_string(round_trip_failures) +
              ", max derivative rel err " + fmt(worst_derivative)};
}

std::string capture(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  status = pclose(pipe);
  return out;
}

Outcome end_to_end() {
  const std::string exe = CVXQUAD_CLI_PATH;
  const std::string data = CVXQUAD_TEST_DATA;
  const std::vector<std::string> commands{
      "integrate --fn \"exp(x)\" --interval 0 1 --eps 1e-6",
      "gap --fn \"abs(x-0.5)\" --interval 0 1 --x 0.5",
      "divergence --generator chi2 --p " + data + "/p.csv --q " + data + "/q.csv"};
  std::vector<nlohmann::json> reports;
  bool ok = true;
  std::string detail;
  for (const auto& args : commands) {
    int s1 = 0, s2 = 0;
    const std::string first = capture("\"" + exe + "\" " + args, s1);
    const std::string second = capture("\"" + exe + "\" " + args, s2);
    if (s1 != 0 || s2 != 0 || first != second || first.empty()) {
      ok = false;
      detail += "[" + args + "] not reproducible; ";
      reports.emplace_back();
      continue;
    }
    reports.push_back(nlohmann::json::parse(first));
  }
  if (!ok) return {false, detail};

  const auto& in = reports[0]["integral"];
  const double lo = in["lo"], hi = in["hi"];
  const bool integrate_ok = lo <= 1.7182818 && 1.7182818 <= hi && lo <= std::numbers::e - 1 &&
                            std::numbers::e - 1 <= hi && hi - lo <= 1e-6;
  const bool gap_ok = reports[1]["lower"] == 0.25 && reports[1]["upper"] == 0.25;
  const auto& d = reports[2];
  const double hh_lo = d["hh"]["lo"], hh_hi = d["hh"]["hi"];
  const bool div_ok = d["csiszar"] == 0.25 && std::abs(hh_lo - 0.0833333) <= 5e-8 &&
                      std::abs(hh_hi - 0.0833333) <= 5e-8 && d["sandwich_holds"] == true;
  return {integrate_ok && gap_ok && div_ok,
          "3 commands identical across two runs; integral [" + fmt(lo) + ", " + fmt(hi) +
              "], gap lower/upper " + reports[1]["lower"].dump() + "/" + reports[1]["upper"].dump() +
              ", csiszar " + d["csiszar"].dump() + ", hh [" + fmt(hh_lo) + ", " + fmt(hh_hi) + "]"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 sharpness equalities for the kink", sharpness},
      {"AC2 pointwise sandwich on the catalog", sandwich},
      {"AC3 Hermite-Hadamard bounds", hh_refinement},
      {"AC4 composite containment and order", composite_order},
      {"AC5 adaptive integrator", adaptive},
      {"AC6 midpoint specialization identity", specialization},
      {"AC7 expectation enclosures", expectation},
      {"AC8 divergence closed forms", divergences},
      {"AC9 expression parser", parser},
      {"AC10 end-to-end CLI determinism", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " -- " << o.detail << '\n';
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
