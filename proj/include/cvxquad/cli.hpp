#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvxquad/divergence.hpp"

namespace cvxquad::cli {

enum ExitStatus : int { kOk = 0, kUsage = 1, kHypothesis = 2 };

enum class Command { integrate, gap, hh, expectation, divergence, check };
enum class OutputFormat { json, table };
enum class DistributionFormat { detect, csv, json };

struct RunConfig {
  Command command = Command::check;
  std::string function;             // expression text
  std::string catalog;              // catalog name, used when function is empty
  std::vector<double> params;       // catalog parameters
  std::string density;              // expectation / check: density expression
  std::string variable = "x";
  double a = 0.0;
  double b = 1.0;
  bool has_interval = false;
  double eps = 1e-6;
  std::size_t max_cells = 100000;
  std::size_t n = 0;                // > 0 selects a fixed uniform partition
  std::optional<double> x;
  std::string xi_rule = "midpoint";
  std::vector<double> custom_xi;
  int gridpoints = 1001;
  bool best = false;
  std::string generator;
  std::filesystem::path p_path;
  std::filesystem::path q_path;
  DistributionFormat distribution_format = DistributionFormat::detect;
  bool normalize = false;
  bool allow_nonconvex = false;
  OutputFormat output_format = OutputFormat::json;
};

/// Reads a distribution: CSV with one weight per line (blank lines ignored) or
/// a JSON array of numbers. Without `normalize` the weights must sum to 1
/// within 1e-9.
divergence::DiscreteDistribution load_distribution(const std::filesystem::path& path,
                                                   DistributionFormat format, bool normalize);

/// Runs one command. Exit 0 on success, 1 on usage errors, 2 when a hypothesis
/// (convexity, density, distribution) fails. Reports go to `out`, diagnostics
/// to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses command-line arguments (argv[0] is the program name) and runs.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvxquad::cli
