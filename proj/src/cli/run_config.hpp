#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksapprox/ensemble.hpp"
#include "ksapprox/kernels.hpp"

namespace ksapprox::cli {

/// Everything a subcommand needs. Mirrors EnsembleConfig plus output and
/// checking settings; serialised verbatim into summary.json so a run can be
/// replayed from its own summary.
struct RunConfig {
  std::string command;

  std::string kernel = "fbm";  // fbm | lei-nualart | tabulated
  double H = 0.75;
  std::optional<TabulatedTable> table;

  double theta = 1.5707963267948966;
  std::vector<double> epsilons{0.1};
  std::vector<double> grid{0.25, 0.5, 0.75, 1.0};
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string mode = "dual";  // single | dual | decomposition
  std::string lei_nualart_channel = "cos";

  std::optional<double> tail_tol;
  std::optional<double> truncation_radius;
  double quad_tol = 1e-8;
  double max_events = 1e9;

  /// kernel-check model and convergence target: fbm | sub-fbm | lei-nualart-x.
  std::string model = "fbm";
  std::optional<std::string> target;
  double tol = 1e-4;

  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
  int verbosity = 0;
};

/// Parses "2pi/3", "pi/2", "2*pi/3", "1.047" and the like.
double parse_angle(const std::string& text);

/// Comma separated reals.
std::vector<double> parse_list(const std::string& text);

nlohmann::json to_json(const RunConfig& cfg);

/// Reads a config document. A summary.json written by a previous run is
/// accepted as well (its "config" member is used).
RunConfig from_json(const nlohmann::json& doc);

/// Checks every field against the library's preconditions; throws
/// std::invalid_argument with a readable message.
void validate(const RunConfig& cfg);

KernelSpec make_kernel(const RunConfig& cfg);
CovModel parse_model(const std::string& name, double H);
EnsembleMode parse_mode(const std::string& name);

/// Ensemble configuration for one epsilon.
EnsembleConfig make_ensemble(const RunConfig& cfg, double epsilon);

}  // namespace ksapprox::cli
