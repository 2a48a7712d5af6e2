#include "cvxquad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace cvxquad::quad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegeneracySlack = 1e-9;

bool is_midpoint(double u, double xi, double v) {
  const double m = 0.5 * (u + v);
  return std::abs(xi - m) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                 std::max({std::abs(u), std::abs(v), v - u});
}

// (xi - u) f(u) + (v - xi) f(v), skipping zero weights.
double cell_rule(const ConvexFunction& f, double u, double xi, double v) {
  double g = 0.0;
  if (xi > u) g += (xi - u) * f(u);
  if (v > xi) g += (v - xi) * f(v);
  return g;
}

// FD oracles get their step scaled to the cell so neighbouring quotients do not
// straddle it.
ConvexFunction local(const ConvexFunction& f, double u, double v) {
  return f.has_exact_derivatives() ? f : f.restricted(Interval(u, v));
}

Enclosure checked(double lo, double hi, std::size_t cell) {
  if (lo > hi) {
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (lo - hi > kDegeneracySlack * scale) {
      throw ConvexityError("remainder bounds cross in cell " + std::to_string(cell) +
                           ": the integrand is not convex there");
    }
    return Enclosure::hull(lo, hi);
  }
  return {lo, hi};
}

Enclosure integral_from(double gn, const Enclosure& rem) {
  double lo = gn - rem.hi();
  double hi = gn - rem.lo();
  if (std::isnan(lo)) lo = -kInf;
  if (std::isnan(hi)) hi = kInf;
  return {lo, hi};
}

void require_matching(const ConvexFunction& f, const Partition& p) {
  if (p.a() != f.domain().a() || p.b() != f.domain().b()) {
    throw DomainError("partition does not span the domain of " + f.label());
  }
}

Enclosure cell_remainder_at(const ConvexFunction& f, double u, double xi, double v,
                            std::size_t cell) {
  const ConvexFunction g = local(f, u, v);
  const double wl = (xi - u) * (xi - u);
  const double wr = (v - xi) * (v - xi);
  double lo = 0.0;
  double hi = 0.0;
  if (wr > 0.0) {
    lo += wr * g.derivative(xi, Side::right);
    hi += wr * g.derivative(v, Side::left);
  }
  if (wl > 0.0) {
    lo -= wl * g.derivative(xi, Side::left);
    hi -= wl * g.derivative(u, Side::right);
  }
  return checked(0.5 * lo, 0.5 * hi, cell);
}

}  // namespace

Partition::Partition(std::vector<double> points, std::vector<double> xi)
    : points_(std::move(points)), xi_(std::move(xi)) {
  if (points_.size() < 2) throw PreconditionError("partition needs at least one cell");
  if (xi_.size() + 1 != points_.size()) {
    throw PreconditionError("partition needs exactly one intermediate point per cell");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw DomainError("partition points must be finite");
    if (i > 0 && !(points_[i - 1] < points_[i])) {
      throw DomainError("partition points must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < xi_.size(); ++i) {
    if (!(points_[i] <= xi_[i] && xi_[i] <= points_[i + 1])) {
      throw DomainError("intermediate point " + std::to_string(i) + " lies outside its cell");
    }
  }
}

Partition Partition::uniform(const Interval& iv, std::size_t n, XiRule rule,
                             std::span<const double> custom) {
  if (n < 1) throw PreconditionError("partition needs n >= 1");
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = iv.a() + iv.length() * static_cast<double>(i) / static_cast<double>(n);
  }
  pts[n] = iv.b();

  std::vector<double> xi(n);
  switch (rule) {
    case XiRule::midpoint:
      for (std::size_t i = 0; i < n; ++i) xi[i] = 0.5 * (pts[i] + pts[i + 1]);
      break;
    case XiRule::left:
      for (std::size_t i = 0; i < n; ++i) xi[i] = pts[i];
      break;
    case XiRule::right:
      for (std::size_t i = 0; i < n; ++i) xi[i] = pts[i + 1];
      break;
    case XiRule::custom:
      if (custom.size() != n) {
        throw PreconditionError("custom rule needs " + std::to_string(n) + " intermediate points");
      }
      xi.assign(custom.begin(), custom.end());
      break;
  }
  return Partition(std::move(pts), std::move(xi));
}

Partition uniform_partition(const Interval& iv, std::size_t n, XiRule rule,
                            std::span<const double> custom) {
  return Partition::uniform(iv, n, rule, custom);
}

double generalized_trapezoid(const ConvexFunction& f, const Partition& p) {
  require_matching(f, p);
  const auto& x = p.points();
  double g = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) g += cell_rule(f, x[i], p.xi()[i], x[i + 1]);
  return g;
}

double trapezoid(const ConvexFunction& f, const Partition& p) {
  require_matching(f, p);
  const auto& x = p.points();
  double t = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) t += 0.5 * (f(x[i]) + f(x[i + 1])) * p.width(i);
  return t;
}

Enclosure cell_remainder(const ConvexFunction& f, double u, double xi, double v) {
  if (!(u < v) || !(u <= xi && xi <= v)) throw DomainError("invalid cell");
  return cell_remainder_at(f, u, xi, v, 0);
}

std::vector<Enclosure> cell_remainders(const ConvexFunction& f, const Partition& p) {
  require_matching(f, p);
  const auto& x = p.points();
  std::vector<Enclosure> out;
  out.reserve(p.cells());
  for (std::size_t i = 0; i < p.cells(); ++i) {
    out.push_back(cell_remainder_at(f, x[i], p.xi()[i], x[i + 1], i));
  }
  return out;
}

Enclosure remainder_enclosure(const ConvexFunction& f, const Partition& p) {
  Enclosure total = Enclosure::point(0.0);
  for (const Enclosure& e : cell_remainders(f, p)) total += e;
  return total;
}

Enclosure trapezoid_remainder_enclosure(const ConvexFunction& f, const Partition& p) {
  require_matching(f, p);
  const auto& x = p.points();
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const double u = x[i];
    const double v = x[i + 1];
    const double m = p.xi()[i];
    if (!is_midpoint(u, m, v)) {
      throw PreconditionError("cell " + std::to_string(i) + " does not use its midpoint");
    }
    const ConvexFunction g = local(f, u, v);
    const double h2 = (v - u) * (v - u);
    const double jump = g.derivative(m, Side::right) - g.derivative(m, Side::left);
    const double spread = g.derivative(v, Side::left) - g.derivative(u, Side::right);
    const Enclosure cell = checked(0.125 * jump * h2, 0.125 * spread * h2, i);
    lo += cell.lo();
    hi += cell.hi();
  }
  return {lo, hi};
}

double differentiable_lower_remainder(const ConvexFunction& f, const Partition& p, double tol) {
  require_matching(f, p);
  const auto& x = p.points();
  double total = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const double u = x[i];
    const double v = x[i + 1];
    const double xi = p.xi()[i];
    const double weight = (0.5 * (u + v) - xi) * (v - u);
    if (weight == 0.0) continue;
    const ConvexFunction g = local(f, u, v);
    double slope = 0.0;
    if (xi == f.domain().a()) {
      slope = g.derivative(xi, Side::right);
    } else if (xi == f.domain().b()) {
      slope = g.derivative(xi, Side::left);
    } else {
      const double dl = g.derivative(xi, Side::left);
      const double dr = g.derivative(xi, Side::right);
      if (std::abs(dr - dl) > tol * std::max({1.0, std::abs(dl), std::abs(dr)})) {
        throw NotDifferentiableError("kink at the intermediate point of cell " +
                                     std::to_string(i));
      }
      slope = dr;
    }
    total += weight * slope;
  }
  return total;
}

QuadratureResult integrate(const ConvexFunction& f, const Partition& p) {
  QuadratureResult r;
  r.gn = generalized_trapezoid(f, p);
  r.remainder = remainder_enclosure(f, p);
  r.integral = integral_from(r.gn, r.remainder);
  r.cells = p.cells();
  return r;
}

namespace {

struct Cell {
  double u;
  double v;
  double g;
  Enclosure rem;
};

Cell make_cell(const ConvexFunction& f, double u, double v, std::size_t index) {
  const double m = 0.5 * (u + v);
  Cell c{u, v, cell_rule(f, u, m, v), cell_remainder_at(f, u, m, v, index)};
  // An infinite endpoint slope leaves the upper side open; the midpoint
  // (Hermite-Hadamard) bound integral >= h f(m) closes it.
  if (!std::isfinite(c.rem.hi()) && std::isfinite(c.g)) {
    const double hh = c.g - (v - u) * f(m);
    c.rem = Enclosure::hull(c.rem.lo(), std::max(c.rem.lo(), hh));
  }
  return c;
}

struct HeapEntry {
  double width;
  double u;
  std::size_t index;
};

// Widest first; leftmost on ties.
struct Narrower {
  bool operator()(const HeapEntry& x, const HeapEntry& y) const {
    if (x.width != y.width) return x.width < y.width;
    return x.u > y.u;
  }
};

QuadratureResult assemble(std::vector<Cell> cells) {
  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.u < y.u; });
  QuadratureResult r;
  double gn = 0.0;
  Enclosure rem = Enclosure::point(0.0);
  for (const Cell& c : cells) {
    gn += c.g;
    rem += c.rem;
  }
  r.gn = gn;
  r.remainder = rem;
  r.integral = integral_from(gn, rem);
  r.cells = cells.size();
  return r;
}

}  // namespace

QuadratureResult adaptive_integrate(const ConvexFunction& f, double eps, std::size_t max_cells) {
  if (!(eps > 0.0)) throw PreconditionError("adaptive integration needs eps > 0");
  if (max_cells < 1) throw PreconditionError("adaptive integration needs max_cells >= 1");

  std::vector<Cell> cells;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, Narrower> heap;
  double finite_width = 0.0;
  std::size_t infinite_cells = 0;

  auto add = [&](Cell c, std::size_t slot) {
    const double w = c.rem.width();
    if (std::isfinite(w)) {
      finite_width += w;
    } else {
      ++infinite_cells;
    }
    heap.push({w, c.u, slot});
    if (slot == cells.size()) {
      cells.push_back(c);
    } else {
      cells[slot] = c;
    }
  };

  add(make_cell(f, f.domain().a(), f.domain().b(), 0), 0);

  while (true) {
    if (infinite_cells == 0 && finite_width <= eps) {
      QuadratureResult r = assemble(cells);
      if (r.integral.width() <= eps) return r;
      finite_width = r.remainder.width();  // resync after drift
    }
    if (cells.size() >= max_cells) break;

    const HeapEntry top = heap.top();
    const Cell c = cells[top.index];
    const double m = 0.5 * (c.u + c.v);
    if (!(c.u < m && m < c.v)) break;  // cell can no longer be bisected
    heap.pop();
    if (std::isfinite(top.width)) {
      finite_width -= top.width;
    } else {
      --infinite_cells;
    }
    add(make_cell(f, c.u, m, top.index), top.index);
    add(make_cell(f, m, c.v, cells.size()), cells.size());
  }

  QuadratureResult r = assemble(cells);
  r.converged = r.integral.width() <= eps;
  return r;
}

}  // namespace cvxquad::quad
