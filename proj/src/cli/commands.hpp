#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "output.hpp"
#include "run_config.hpp"

namespace ksapprox::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitTolerance = 2;
inline constexpr int kExitGuard = 3;

inline constexpr int kSummarySchemaVersion = 1;

/// Cross-covariance entries must satisfy |estimate| <= kCrossSigma * se.
inline constexpr double kCrossSigma = 4.0;
/// Decompose tolerance: kDecomposeRelTol * cov_sub(T, T) + kDecomposeSigma * se.
inline constexpr double kDecomposeRelTol = 0.05;
inline constexpr double kDecomposeSigma = 3.0;

struct CommandOutcome {
  int exit_code = kExitPass;
  std::vector<Table> tables;
  nlohmann::json results = nlohmann::json::object();
  std::string message;
};

CommandOutcome cmd_kernel_check(const RunConfig& cfg);
CommandOutcome cmd_simulate(const RunConfig& cfg);
CommandOutcome cmd_convergence(const RunConfig& cfg);
CommandOutcome cmd_independence(const RunConfig& cfg);
CommandOutcome cmd_decompose(const RunConfig& cfg);

/// Statistics tables shared by the Monte Carlo subcommands: stats
/// (t_i, t_j, channel, estimate, se) and moments, or raw values below the
/// replica floor.
std::vector<Table> ensemble_tables(const EnsembleStats& stats);

/// Runs cfg.command, writes its tables and summary.json under cfg.out_dir
/// and returns the exit code. Errors are reported on `err`.
int execute(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace ksapprox::cli
