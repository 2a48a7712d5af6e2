#include "cvxquad/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cvxquad/expr.hpp"
#include "cvxquad/funcs.hpp"
#include "cvxquad/pointwise.hpp"
#include "cvxquad/probability.hpp"
#include "cvxquad/quadrature.hpp"

namespace cvxquad::cli {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

class HypothesisError : public Error {
 public:
  using Error::Error;
};

// JSON has no infinities; they are written as the strings "inf" / "-inf".
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json enclosure_json(const Enclosure& e) { return Json{{"lo", num(e.lo())}, {"hi", num(e.hi())}}; }

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, rows);
    }
    return;
  }
  std::string text;
  if (j.is_array()) {
    for (const auto& item : j) {
      if (!text.empty()) text += ' ';
      text += item.is_number() ? format_number(item.get<double>()) : item.dump();
    }
  } else if (j.is_number()) {
    text = format_number(j.get<double>());
  } else if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_null()) {
    text = "-";
  } else {
    text = j.dump();
  }
  rows.emplace_back(prefix, text);
}

void render(const Json& report, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::json) {
    out << report.dump(2) << '\n';
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(report, "", rows);
  std::size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.first.size());
  for (const auto& [key, value] : rows) {
    out << key << std::string(width + 2 - key.size(), ' ') << value << '\n';
  }
}

Interval interval_of(const RunConfig& cfg) {
  if (!cfg.has_interval) throw UsageError("--interval a b is required");
  try {
    return Interval(cfg.a, cfg.b);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

struct ResolvedFunction {
  ConvexFunction f;
  bool certified;
};

ResolvedFunction resolve_function(const RunConfig& cfg, std::ostream& err) {
  const Interval iv = interval_of(cfg);
  if (!cfg.function.empty()) {
    const expr::Expression e = expr::parse(cfg.function, cfg.variable);
    ConvexFunction f = expr::to_function(e, iv, cfg.function);
    const ConvexityReport report = check_convexity(f, cfg.gridpoints);
    if (!report.passed) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "'" << cfg.function << "' is not convex on [" << iv.a() << ", " << iv.b()
          << "]: secant slopes decrease by " << report.worst_violation << " at ("
          << report.witness[0] << ", " << report.witness[1] << ", " << report.witness[2] << ")";
      if (!cfg.allow_nonconvex) throw HypothesisError(msg.str());
      err << "warning: " << msg.str() << "; results are not certified\n";
    }
    return {f, report.passed && f.has_exact_derivatives()};
  }
  if (!cfg.catalog.empty()) {
    return {catalog(cfg.catalog, cfg.params, iv), true};
  }
  throw UsageError("a function is required (--fn TEXT or --catalog NAME)");
}

quad::XiRule xi_rule_of(const std::string& name) {
  if (name == "midpoint") return quad::XiRule::midpoint;
  if (name == "left") return quad::XiRule::left;
  if (name == "right") return quad::XiRule::right;
  if (name == "custom") return quad::XiRule::custom;
  throw UsageError("unknown --xi-rule '" + name + "'");
}

Json header(const RunConfig& cfg, const std::string& command) {
  Json j;
  j["command"] = command;
  if (cfg.has_interval) j["interval"] = Json::array({cfg.a, cfg.b});
  return j;
}

Json run_integrate(const RunConfig& cfg, std::ostream& err) {
  const ResolvedFunction rf = resolve_function(cfg, err);
  Json j = header(cfg, "integrate");
  j["function"] = rf.f.label();
  quad::QuadratureResult r;
  if (cfg.n > 0) {
    const quad::Partition p = quad::uniform_partition(rf.f.domain(), cfg.n, xi_rule_of(cfg.xi_rule),
                                                      cfg.custom_xi);
    r = quad::integrate(rf.f, p);
    j["method"] = "partition";
    j["xi_rule"] = cfg.xi_rule;
  } else {
    if (!(cfg.eps > 0.0)) throw UsageError("--eps must be positive");
    r = quad::adaptive_integrate(rf.f, cfg.eps, cfg.max_cells);
    j["method"] = "adaptive";
    j["eps"] = cfg.eps;
  }
  j["gn"] = num(r.gn);
  j["integral"] = enclosure_json(r.integral);
  j["remainder"] = enclosure_json(r.remainder);
  j["cells"] = r.cells;
  j["converged"] = r.converged;
  j["certified"] = rf.certified;
  return j;
}

Json run_gap(const RunConfig& cfg, std::ostream& err) {
  if (!cfg.x) throw UsageError("gap needs --x");
  const ResolvedFunction rf = resolve_function(cfg, err);
  const double x = *cfg.x;
  if (!rf.f.domain().contains(x)) throw UsageError("--x lies outside the interval");
  Json j = header(cfg, "gap");
  j["function"] = rf.f.label();
  j["x"] = x;
  j["gap"] = num(pointwise::gap(rf.f, x));
  j["lower"] = rf.f.domain().interior(x) ? num(pointwise::lower_gap_bound(rf.f, x)) : Json();
  j["upper"] = num(pointwise::upper_gap_bound(rf.f, x));
  j["certified"] = rf.certified;
  return j;
}

Json run_hh(const RunConfig& cfg, std::ostream& err) {
  const ResolvedFunction rf = resolve_function(cfg, err);
  Json j = header(cfg, "hh");
  j["function"] = rf.f.label();
  j["difference"] = num(pointwise::hh_difference(rf.f));
  const Enclosure bounds = pointwise::hh_bounds(rf.f);
  j["lo"] = num(bounds.lo());
  j["hi"] = num(bounds.hi());
  j["certified"] = rf.certified;
  return j;
}

prob::MonotoneDensity density_of(const RunConfig& cfg) {
  const std::string& text = cfg.density.empty() ? cfg.function : cfg.density;
  if (text.empty()) throw UsageError("a density is required (--density TEXT)");
  const expr::Expression e = expr::parse(text, cfg.variable);
  return prob::MonotoneDensity::continuous(
      interval_of(cfg), [e](double t) { return expr::evaluate(e, t); }, text);
}

Json density_json(const prob::DensityReport& r) {
  Json j;
  j["valid"] = r.valid();
  j["nonnegative"] = r.nonnegative;
  j["monotone"] = r.monotone;
  j["normalized"] = r.normalized;
  j["mass"] = enclosure_json(r.mass);
  j["problems"] = r.problems;
  return j;
}

Json run_expectation(const RunConfig& cfg) {
  const prob::MonotoneDensity d = density_of(cfg);
  const prob::DensityReport report = prob::validate_density(d, cfg.gridpoints);
  if (!report.valid()) {
    std::string msg = "density '" + d.label() + "' is not a valid nondecreasing density:";
    for (const auto& p : report.problems) msg += " " + p + ";";
    throw HypothesisError(msg);
  }
  Json j = header(cfg, "expectation");
  j["density"] = d.label();
  prob::ExpectationEnclosure e;
  Json lower;
  if (cfg.x) {
    const double x = *cfg.x;
    if (!d.domain().contains(x)) throw UsageError("--x lies outside the interval");
    j["mode"] = "point";
    e.hi = prob::expectation_upper(d, x);
    e.x_lower = e.x_upper = x;
    if (d.domain().interior(x)) {
      e.lo = prob::expectation_lower(d, x);
      lower = num(e.lo);
    }
  } else {
    e = cfg.best ? prob::best_expectation_enclosure(d, cfg.gridpoints)
                 : prob::midpoint_expectation_enclosure(d);
    j["mode"] = cfg.best ? "best" : "midpoint";
    lower = num(e.lo);
  }
  j["expectation"] = Json{{"lo", lower}, {"hi", num(e.hi)}};
  j["x_lower"] = e.x_lower;
  j["x_upper"] = e.x_upper;
  j["mass"] = enclosure_json(report.mass);
  j["certified"] = true;
  return j;
}

divergence::DiscreteDistribution load_checked(const std::filesystem::path& path,
                                              const RunConfig& cfg) {
  try {
    return load_distribution(path, cfg.distribution_format, cfg.normalize);
  } catch (const PreconditionError& e) {
    throw HypothesisError(path.string() + ": " + e.what());
  }
}

Json run_divergence(const RunConfig& cfg) {
  if (cfg.generator.empty()) throw UsageError("divergence needs --generator");
  if (cfg.p_path.empty() || cfg.q_path.empty()) throw UsageError("divergence needs --p and --q");
  const divergence::GeneratorFunction f = divergence::generator(cfg.generator);
  const auto p = load_checked(cfg.p_path, cfg);
  const auto q = load_checked(cfg.q_path, cfg);
  if (p.size() != q.size()) {
    throw HypothesisError("p and q have different lengths (" + std::to_string(p.size()) +
                          " vs " + std::to_string(q.size()) + ")");
  }
  divergence::HhOptions options;
  options.eps = cfg.eps;
  options.max_cells = cfg.max_cells;
  const divergence::SandwichReport s = divergence::sandwich_report(f, p, q, options);

  Json j = header(cfg, "divergence");
  j["generator"] = f.label;
  j["n"] = p.size();
  j["csiszar"] = num(2.0 * s.half_csiszar);
  j["lin_wong"] = num(s.lin_wong);
  j["half_csiszar"] = num(s.half_csiszar);
  j["hh"] = enclosure_json(s.hh);
  j["hh_converged"] = s.converged;
  j["sandwich_holds"] = s.holds;
  j["gap"] = enclosure_json(divergence::gap_enclosure(f, p, q));
  return j;
}

Json run_check(const RunConfig& cfg, bool& passed) {
  Json j = header(cfg, "check");
  passed = true;
  bool any = false;
  if (!cfg.function.empty() || !cfg.catalog.empty()) {
    any = true;
    const Interval iv = interval_of(cfg);
    ConvexityReport r;
    if (!cfg.function.empty()) {
      const expr::Expression e = expr::parse(cfg.function, cfg.variable);
      r = check_convexity([e](double t) { return expr::evaluate(e, t); }, iv, cfg.gridpoints);
    } else {
      r = check_convexity(catalog(cfg.catalog, cfg.params, iv), cfg.gridpoints);
    }
    j["convexity"] = Json{{"passed", r.passed},
                          {"worst_violation", num(r.worst_violation)},
                          {"threshold", num(r.threshold)},
                          {"witness", Json::array({r.witness[0], r.witness[1], r.witness[2]})}};
    passed = passed && r.passed;
  }
  if (!cfg.density.empty()) {
    any = true;
    const prob::DensityReport r = prob::validate_density(density_of(cfg), cfg.gridpoints);
    j["density"] = density_json(r);
    passed = passed && r.valid();
  }
  for (const auto& [name, path] : {std::pair{"p", cfg.p_path}, std::pair{"q", cfg.q_path}}) {
    if (path.empty()) continue;
    any = true;
    Json dj;
    try {
      const auto dist = load_distribution(path, cfg.distribution_format, cfg.normalize);
      dj["valid"] = true;
      dj["n"] = dist.size();
    } catch (const PreconditionError& e) {
      dj["valid"] = false;
      dj["problem"] = e.what();
      passed = false;
    }
    j["distributions"][name] = dj;
  }
  if (!any) throw UsageError("check needs --fn, --catalog, --density, --p or --q");
  j["passed"] = passed;
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

divergence::DiscreteDistribution load_distribution(const std::filesystem::path& path,
                                                   DistributionFormat format, bool normalize) {
  const std::string text = read_file(path);
  if (format == DistributionFormat::detect) {
    format = path.extension() == ".json" ? DistributionFormat::json : DistributionFormat::csv;
  }

  std::vector<double> weights;
  if (format == DistributionFormat::json) {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      const auto upto = std::min<std::size_t>(e.byte, text.size());
      const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
      throw InputError("invalid JSON", static_cast<std::size_t>(line));
    }
    if (!j.is_array()) throw InputError("expected a JSON array of numbers", 1);
    for (const auto& item : j) {
      if (!item.is_number()) throw InputError("expected a JSON array of numbers", 1);
      weights.push_back(item.get<double>());
    }
  } else {
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string cell = trim(raw);
      if (cell.empty()) continue;
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw InputError("'" + cell + "' is not a number", line);
      }
      weights.push_back(v);
    }
  }
  if (weights.empty()) throw InputError("no weights found", 1);
  if (normalize) return divergence::DiscreteDistribution::normalized(std::move(weights));
  return divergence::DiscreteDistribution(std::move(weights), 1e-9);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Json report;
    int status = kOk;
    switch (config.command) {
      case Command::integrate: report = run_integrate(config, err); break;
      case Command::gap: report = run_gap(config, err); break;
      case Command::hh: report = run_hh(config, err); break;
      case Command::expectation: report = run_expectation(config); break;
      case Command::divergence: report = run_divergence(config); break;
      case Command::check: {
        bool passed = true;
        report = run_check(config, passed);
        if (!passed) status = kHypothesis;
        break;
      }
    }
    render(report, config.output_format, out);
    return status;
  } catch (const HypothesisError& e) {
    err << "error: " << e.what() << '\n';
    return kHypothesis;
  } catch (const ConvexityError& e) {
    err << "error: " << e.what() << '\n';
    return kHypothesis;
  } catch (const EvaluationError& e) {
    err << "error: " << e.what() << '\n';
    return kHypothesis;
  } catch (const UndefinedDivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kHypothesis;
  } catch (const NotDifferentiableError& e) {
    err << "error: " << e.what() << '\n';
    return kHypothesis;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<double> interval;
  std::string format = "json";
  std::string dist_format = "detect";
  std::string p_path;
  std::string q_path;
  double x = 0.0;

  CLI::App app{"Certified quadrature and trapezoid-gap bounds for convex functions", "cvxquad"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));

  auto add_function = [&](CLI::App* sub) {
    sub->add_option("--fn", cfg.function, "Function of x, e.g. \"exp(x)\"");
    sub->add_option("--catalog", cfg.catalog, "Catalog function name");
    sub->add_option("--params", cfg.params, "Catalog parameters");
    sub->add_option("--var", cfg.variable, "Variable name in --fn");
    sub->add_option("--gridpoints", cfg.gridpoints, "Grid size for hypothesis checks");
    sub->add_flag("--allow-nonconvex", cfg.allow_nonconvex,
                  "Run despite a failed convexity check (results marked uncertified)");
  };
  auto add_interval = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--interval", interval, "Interval endpoints a b")->expected(2);
    if (required) opt->required();
  };

  auto* integrate = app.add_subcommand("integrate", "Certified enclosure of the integral");
  add_function(integrate);
  add_interval(integrate, true);
  integrate->add_option("--eps", cfg.eps, "Target enclosure width (adaptive)");
  integrate->add_option("--max-cells", cfg.max_cells, "Cell budget (adaptive)");
  integrate->add_option("--n", cfg.n, "Fixed uniform partition with n cells");
  integrate->add_option("--xi-rule", cfg.xi_rule, "midpoint, left, right or custom");
  integrate->add_option("--xi", cfg.custom_xi, "Intermediate points for --xi-rule custom");

  auto* gap = app.add_subcommand("gap", "Bounds on the generalized trapezoid gap at x");
  add_function(gap);
  add_interval(gap, true);
  auto* x_gap = gap->add_option("--x", x, "Split point")->required();

  auto* hh = app.add_subcommand("hh", "Hermite-Hadamard difference bounds");
  add_function(hh);
  add_interval(hh, true);

  auto* expectation = app.add_subcommand("expectation", "Bounds on E(X) for a nondecreasing density");
  expectation->add_option("--density", cfg.density, "Density of x");
  add_interval(expectation, true);
  auto* x_exp = expectation->add_option("--x", x, "Split point (default: midpoint)");
  expectation->add_flag("--best", cfg.best, "Optimise the split point over a grid");
  expectation->add_option("--gridpoints", cfg.gridpoints, "Grid size");
  expectation->add_option("--var", cfg.variable, "Variable name in --density");

  auto* div = app.add_subcommand("divergence", "Csiszar, Lin-Wong and HH divergences");
  div->add_option("--generator", cfg.generator, "chi2, kl, tv or hellinger")->required();
  div->add_option("--p", p_path, "File with p weights")->required();
  div->add_option("--q", q_path, "File with q weights")->required();
  div->add_option("--input-format", dist_format, "detect, csv or json")
      ->check(CLI::IsMember({"detect", "csv", "json"}));
  div->add_flag("--normalize", cfg.normalize, "Rescale weights to sum to 1");
  div->add_option("--eps", cfg.eps, "Target width of the HH enclosure");
  div->add_option("--max-cells", cfg.max_cells, "Cell budget per inner integral");

  auto* check = app.add_subcommand("check", "Validate hypotheses only");
  add_function(check);
  add_interval(check, false);
  check->add_option("--density", cfg.density, "Density of x");
  check->add_option("--p", p_path, "Distribution file");
  check->add_option("--q", q_path, "Distribution file");
  check->add_option("--input-format", dist_format, "detect, csv or json")
      ->check(CLI::IsMember({"detect", "csv", "json"}));
  check->add_flag("--normalize", cfg.normalize, "Rescale weights to sum to 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (integrate->parsed()) cfg.command = Command::integrate;
  if (gap->parsed()) cfg.command = Command::gap;
  if (hh->parsed()) cfg.command = Command::hh;
  if (expectation->parsed()) cfg.command = Command::expectation;
  if (div->parsed()) cfg.command = Command::divergence;
  if (check->parsed()) cfg.command = Command::check;

  if (interval.size() == 2) {
    cfg.a = interval[0];
    cfg.b = interval[1];
    cfg.has_interval = true;
  }
  if (x_gap->count() > 0 || x_exp->count() > 0) cfg.x = x;
  cfg.p_path = p_path;
  cfg.q_path = q_path;
  cfg.output_format = format == "table" ? OutputFormat::table : OutputFormat::json;
  cfg.distribution_format = dist_format == "csv"    ? DistributionFormat::csv
                            : dist_format == "json" ? DistributionFormat::json
                                                    : DistributionFormat::detect;
  if (!cfg.custom_xi.empty() && cfg.xi_rule == "midpoint") cfg.xi_rule = "custom";
  return run(cfg, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"cvxquad"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cvxquad::cli
