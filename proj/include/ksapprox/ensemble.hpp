#pragma once

// Monte Carlo ensembles of transforms: replica r runs on Philox stream r of
// the master seed, raw values land in fixed slots and statistics are formed
// sequentially in replica order, so results do not depend on the number of
// worker threads.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ksapprox/kernels.hpp"
#include "ksapprox/ks_transform.hpp"

namespace ksapprox {

enum class EnsembleMode {
  single_channel,  // cos functional of one kernel
  dual_channel,    // cos and sin functionals of one kernel
  decomposition,   // Lei-Nualart on one channel, fBm on the other, combined C1 x + b
};

std::string to_string(EnsembleMode mode);

/// Below this many replicas only raw values are produced.
inline constexpr std::size_t kMinStatisticalReplicas = 100;
/// Minimum sample size for the normality composite.
inline constexpr std::size_t kMinNormalitySamples = 1000;
/// 99.9% quantile of chi-square with 2 degrees of freedom, 2 ln 1000.
inline constexpr double kNormalityThreshold = 13.815510557964274;

struct EnsembleConfig {
  /// Kernel of single/dual runs; the Lei-Nualart kernel in decomposition runs.
  KernelSpec kernel = KernelSpec::fbm_volterra(1.0);
  std::vector<double> grid{1.0};
  ApproxParams params;
  std::size_t replicas = 1000;
  std::uint64_t master_seed = 0;
  EnsembleMode mode = EnsembleMode::dual_channel;
  /// Decomposition only: channel carrying the Lei-Nualart functional. The
  /// fBm functional always takes the other one.
  Channel lei_nualart_channel = Channel::cos;
  /// 0 means one worker per hardware thread.
  unsigned threads = 1;
};

/// Raw replica values, one (replicas x grid) matrix per channel.
struct ReplicaValues {
  std::vector<std::string> channel_names;
  std::vector<Eigen::MatrixXd> values;
};

struct NormalityStat {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// n (b1^2 / 6 + (b2 - 3)^2 / 24), asymptotically chi-square(2).
  double composite = 0.0;
};

struct ChannelStats {
  std::string name;
  Eigen::VectorXd mean;
  Eigen::VectorXd se_mean;
  Eigen::MatrixXd cov;     // sample covariance, divisor n - 1
  Eigen::MatrixXd se_cov;  // sd of centred products / sqrt(n)
  Eigen::VectorXd m2;      // E[Y^2]
  Eigen::VectorXd se_m2;
  Eigen::VectorXd m4;      // E[Y^4]
  Eigen::VectorXd se_m4;
  /// Per grid point; empty below kMinNormalitySamples. Zero-variance points
  /// (e.g. t = 0) hold NaN.
  std::vector<NormalityStat> normality;
};

struct EnsembleStats {
  std::vector<double> grid;
  std::size_t replicas = 0;
  double epsilon = 0.0;
  double theta = 0.0;
  double truncation_radius = 0.0;
  std::uint64_t master_seed = 0;
  EnsembleMode mode = EnsembleMode::dual_channel;
  std::vector<ChannelStats> channels;
  /// Centred cross-covariance between the two independent-in-the-limit
  /// channels (cos x sin, or Lei-Nualart x fBm); empty in single mode.
  Eigen::MatrixXd cross_cov;
  Eigen::MatrixXd se_cross;
  std::string cross_rows;
  std::string cross_cols;
  /// Filled only when replicas < kMinStatisticalReplicas.
  std::optional<ReplicaValues> raw;

  const ChannelStats& channel(const std::string& name) const;
};

/// Validates the configuration (theta, horizon guard, decomposition regime)
/// and builds the transformers without running anything.
void validate(const EnsembleConfig& config);

ReplicaValues run_replicas(const EnsembleConfig& config);

EnsembleStats summarize(const EnsembleConfig& config, const ReplicaValues& values);

/// run_replicas followed by summarize.
EnsembleStats run(const EnsembleConfig& config);

/// Sample skewness, excess kurtosis and the Jarque-Bera composite. Needs at
/// least kMinNormalitySamples values; throws DegenerateSample on zero
/// variance.
NormalityStat normality_stat(std::span<const double> samples);

struct ConvergenceRow {
  double epsilon = 0.0;
  /// max over compared channels and grid pairs of |cov - target|.
  double max_cov_error = 0.0;
  double se_max_cov_error = 0.0;
  std::string worst_channel;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  /// max |cross_cov| and the standard error at that entry (NaN in single mode).
  double max_abs_cross = 0.0;
  double se_max_abs_cross = 0.0;
  /// Composite normality statistic per grid point of the first compared channel.
  std::vector<double> normality;
  EnsembleStats stats;
};

struct ConvergenceReport {
  CovModel target;
  std::vector<ConvergenceRow> rows;  // epsilon descending
  /// error(min eps) <= error(max eps) + sqrt(se_1^2 + se_2^2).
  bool trend_ok = true;
  double trend_margin = 0.0;
};

/// Channels compared with the target covariance: the cos channel in single
/// mode, both channels in dual mode, the combined channel in decomposition.
std::vector<std::string> compared_channels(EnsembleMode mode);

/// One ensemble per epsilon (strictly decreasing), each compared against the
/// target covariance.
ConvergenceReport convergence_study(const EnsembleConfig& config, std::span<const double> epsilons,
                                    const CovModel& target);

/// Tail tolerance used for the Lei-Nualart cut-off in decomposition runs when
/// none is configured: 0.1 sqrt(cov_sub(T, T)) / C1, i.e. a tenth of the
/// combined process scale after multiplication by C1.
double decomposition_tail_tol(double H, double horizon_time);

}  // namespace ksapprox
