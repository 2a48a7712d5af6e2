#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvxquad/enclosure.hpp"
#include "cvxquad/funcs.hpp"

// Csiszar f-divergence, Lin-Wong divergence and Hermite-Hadamard divergence on
// a finite support (counting measure).
namespace cvxquad::divergence {

/// Probability vector: nonnegative weights summing to 1 within 1e-12.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> weights, double tol = 1e-12);

  /// Rescales nonnegative weights with a positive sum.
  static DiscreteDistribution normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Normalised convex generator f on [0, inf) with f(1) = 0.
struct GeneratorFunction {
  std::string label;
  RealMap evaluate;          // defined on [0, inf); f(0) is the limit at 0+
  RealMap left_derivative;   // f'-(u) for u > 0
  RealMap right_derivative;  // f'+(u) for u >= 0
  std::optional<RealMap> antiderivative;
  std::optional<double> slope_at_infinity;  // lim f(u)/u when finite

  /// The generator as a ConvexFunction on the bounded interval `iv`.
  ConvexFunction on(const Interval& iv, bool with_antiderivative = true) const;
};

/// chi_squared (u-1)^2, kl u ln u - u + 1, total_variation |u-1|,
/// hellinger (sqrt(u)-1)^2.
/// Aliases: chi2, tv.
GeneratorFunction generator(std::string_view name);

const std::vector<std::string>& generator_names();

struct GeneratorReport {
  bool normalized = true;        // f(1) = 0
  bool convex = true;            // sampled secant slopes
  bool derivatives_ok = true;    // f'-(1) <= 0 <= f'+(1)
  bool valid() const noexcept { return normalized && convex && derivatives_ok; }
};

/// Checks the generator invariants on [0, hi].
GeneratorReport check_generator(const GeneratorFunction& f, double hi = 10.0);

/// sum p f(q/p) with the zero-mass conventions: p = q = 0 contributes 0,
/// p = 0 < q contributes q * slope_at_infinity (UndefinedDivergenceError when
/// the generator declares none).
double csiszar(const GeneratorFunction& f, const DiscreteDistribution& p,
               const DiscreteDistribution& q);

/// csiszar(f, p, (p + q)/2).
double lin_wong(const GeneratorFunction& f, const DiscreteDistribution& p,
                const DiscreteDistribution& q);

struct HhOptions {
  double eps = 1e-10;              // target width of the whole enclosure
  std::size_t max_cells = 200000;  // per inner integral
  bool use_closed_form = true;     // use the generator antiderivative when declared
};

struct HhResult {
  Enclosure value;
  bool converged = true;  // every inner integral met its width target
};

/// sum p^2/(q - p) * integral_1^{q/p} f, i.e. p times the mean of f between 1
/// and q/p. Each inner integral is exact from the antiderivative or a certified
/// adaptive enclosure; terms with |q - p| <= 1e-14 p contribute 0.
HhResult hh_divergence(const GeneratorFunction& f, const DiscreteDistribution& p,
                       const DiscreteDistribution& q, const HhOptions& options = {});

struct SandwichReport {
  double lin_wong = 0.0;
  Enclosure hh;
  double half_csiszar = 0.0;
  bool holds = false;  // lin_wong <= hh.hi and hh.lo <= half_csiszar
  bool converged = true;
};

SandwichReport sandwich_report(const GeneratorFunction& f, const DiscreteDistribution& p,
                               const DiscreteDistribution& q, const HhOptions& options = {},
                               double slack = 1e-9);

/// Bound on 1/2 D_f(p, q) - D_HH(p, q):
///   lo = 1/8 sum [f'+((p+q)/(2p)) - f'-((p+q)/(2p))] |q - p|
///   hi = 1/8 sum f'-(q/p) (q - p)
Enclosure gap_enclosure(const GeneratorFunction& f, const DiscreteDistribution& p,
                        const DiscreteDistribution& q);

/// hi of gap_enclosure written as 1/8 sum [f'-(q/p) - f'+(1)] (q - p); equal to
/// the displayed form because sum (q - p) = 0.
double gap_upper_unreduced(const GeneratorFunction& f, const DiscreteDistribution& p,
                           const DiscreteDistribution& q);

}  // namespace cvxquad::divergence
