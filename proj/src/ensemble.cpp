#include "ksapprox/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ksapprox/error.hpp"

namespace ksapprox {

namespace {

constexpr std::size_t kBlock = 32;

std::vector<Transformer> build_transformers(const EnsembleConfig& config) {
  if (config.replicas == 0) throw std::invalid_argument("replicas must be positive");
  std::vector<Transformer> out;
  if (config.mode != EnsembleMode::decomposition) {
    out.emplace_back(config.kernel, config.grid, config.params);
    return out;
  }
  const double H = config.kernel.hurst();
  if (config.kernel.kind() != KernelKind::lei_nualart) {
    throw std::invalid_argument("decomposition mode expects the Lei-Nualart kernel");
  }
  if (!(H > 0.0 && H < 1.0)) {
    std::ostringstream msg;
    msg << "decomposition mode requires H in (0, 1), got " << H;
    throw std::invalid_argument(msg.str());
  }
  ApproxParams params = config.params;
  const double horizon_time = config.grid.empty() ? 0.0 : *std::max_element(config.grid.begin(), config.grid.end());
  if (!params.truncation_radius && !params.tail_tol && horizon_time > 0.0) {
    params.tail_tol = decomposition_tail_tol(H, horizon_time);
  }
  out.emplace_back(config.kernel, config.grid, params);
  out.emplace_back(KernelSpec::fbm_volterra(H), config.grid, config.params);
  return out;
}

std::vector<std::string> channel_names(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::single_channel: return {"cos"};
    case EnsembleMode::dual_channel: return {"cos", "sin"};
    case EnsembleMode::decomposition: return {"x", "b", "combined"};
  }
  return {};
}

double sample_sd(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// Sample covariance of columns a.col(i), b.col(j) (divisor n - 1) and the
// standard error of that estimate from the spread of centred products.
void centred_products(const Eigen::MatrixXd& a, const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& b,
                      const Eigen::VectorXd& mean_b, Eigen::MatrixXd& est, Eigen::MatrixXd& se) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto D = a.cols();
  est.resize(D, D);
  se.resize(D, D);
  std::vector<double> prod(n);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        prod[r] = (a(ri, i) - mean_a(i)) * (b(ri, j) - mean_b(j));
        sum += prod[r];
      }
      est(i, j) = sum / static_cast<double>(n - 1);
      se(i, j) = sample_sd(prod) / root_n;
    }
  }
}

ChannelStats channel_stats(const std::string& name, const Eigen::MatrixXd& y) {
  const auto n = static_cast<std::size_t>(y.rows());
  const auto D = y.cols();
  const double root_n = std::sqrt(static_cast<double>(n));
  ChannelStats out;
  out.name = name;
  out.mean.resize(D);
  out.se_mean.resize(D);
  out.m2.resize(D);
  out.se_m2.resize(D);
  out.m4.resize(D);
  out.se_m4.resize(D);
  std::vector<double> col(n);
  std::vector<double> sq(n);
  std::vector<double> quart(n);
  for (Eigen::Index i = 0; i < D; ++i) {
    double sum = 0.0;
    double sum2 = 0.0;
    double sum4 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = y(static_cast<Eigen::Index>(r), i);
      col[r] = v;
      sq[r] = v * v;
      quart[r] = sq[r] * sq[r];
      sum += v;
      sum2 += sq[r];
      sum4 += quart[r];
    }
    out.mean(i) = sum / static_cast<double>(n);
    out.se_mean(i) = sample_sd(col) / root_n;
    out.m2(i) = sum2 / static_cast<double>(n);
    out.se_m2(i) = sample_sd(sq) / root_n;
    out.m4(i) = sum4 / static_cast<double>(n);
    out.se_m4(i) = sample_sd(quart) / root_n;
  }
  centred_products(y, out.mean, y, out.mean, out.cov, out.se_cov);
  if (n >= kMinNormalitySamples) {
    for (Eigen::Index i = 0; i < D; ++i) {
      for (std::size_t r = 0; r < n; ++r) col[r] = y(static_cast<Eigen::Index>(r), i);
      try {
        out.normality.push_back(normality_stat(col));
      } catch (const DegenerateSample&) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.normality.push_back({nan, nan, nan});
      }
    }
  }
  return out;
}

}  // namespace

std::string to_string(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::single_channel: return "single";
    case EnsembleMode::dual_channel: return "dual";
    case EnsembleMode::decomposition: return "decomposition";
  }
  return "unknown";
}

double decomposition_tail_tol(double H, double horizon_time) {
  const double c1 = decomposition_constant(H, DecompositionRegime::sub_from_fbm);
  return 0.1 * std::sqrt(cov({CovKind::sub_fbm, H}, horizon_time, horizon_time)) / c1;
}

const ChannelStats& EnsembleStats::channel(const std::string& name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no channel named " + name);
}

void validate(const EnsembleConfig& config) { (void)build_transformers(config); }

ReplicaValues run_replicas(const EnsembleConfig& config) {
  const auto transformers = build_transformers(config);
  std::vector<const Transformer*> ptrs;
  double s_max = 0.0;
  for (const auto& tr : transformers) {
    ptrs.push_back(&tr);
    s_max = std::max(s_max, tr.s_max());
  }

  const std::size_t n = config.replicas;
  const auto D = static_cast<Eigen::Index>(config.grid.size());
  ReplicaValues out;
  out.channel_names = channel_names(config.mode);
  for (std::size_t c = 0; c < out.channel_names.size(); ++c) {
    out.values.emplace_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), D));
  }
  if (!(s_max > 0.0)) return out;

  const bool decomposition = config.mode == EnsembleMode::decomposition;
  const double c1 = decomposition ? decomposition_constant(config.kernel.hurst(), DecompositionRegime::sub_from_fbm) : 0.0;
  const bool x_on_cos = config.lei_nualart_channel == Channel::cos;

  std::atomic<std::size_t> next_block{0};
  std::mutex failure_mutex;
  std::size_t failed_replica = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto worker = [&]() {
    std::vector<std::vector<double>> cos_out(ptrs.size());
    std::vector<std::vector<double>> sin_out(ptrs.size());
    while (true) {
      const std::size_t begin = next_block.fetch_add(1) * kBlock;
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kBlock);
      for (std::size_t r = begin; r < end; ++r) {
        try {
          SegmentStream segments(config.master_seed, r, config.params.epsilon, s_max);
          transform_joint(ptrs, segments, cos_out, sin_out);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (r < failed_replica) {
            failed_replica = r;
            failure = std::current_exception();
          }
          return;
        }
        const auto row = static_cast<Eigen::Index>(r);
        for (Eigen::Index i = 0; i < D; ++i) {
          const auto k = static_cast<std::size_t>(i);
          if (!decomposition) {
            out.values[0](row, i) = cos_out[0][k];
            if (out.values.size() > 1) out.values[1](row, i) = sin_out[0][k];
          } else {
            const double x = x_on_cos ? cos_out[0][k] : sin_out[0][k];
            const double b = x_on_cos ? sin_out[1][k] : cos_out[1][k];
            out.values[0](row, i) = x;
            out.values[1](row, i) = b;
            out.values[2](row, i) = c1 * x + b;
          }
        }
      }
    }
  };

  unsigned threads = config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : config.threads;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) {
    std::string cause = "unknown error";
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      cause = e.what();
    } catch (...) {
    }
    std::ostringstream msg;
    msg << "replica " << failed_replica << " failed: " << cause;
    throw ReplicaFailure(msg.str(), failed_replica, failure);
  }
  return out;
}

EnsembleStats summarize(const EnsembleConfig& config, const ReplicaValues& values) {
  EnsembleStats stats;
  stats.grid = config.grid;
  stats.replicas = config.replicas;
  stats.epsilon = config.params.epsilon;
  stats.theta = config.params.theta.value();
  stats.master_seed = config.master_seed;
  stats.mode = config.mode;
  const auto transformers = build_transformers(config);
  stats.truncation_radius = transformers.front().truncation_radius();

  if (config.replicas < kMinStatisticalReplicas) {
    stats.raw = values;
    return stats;
  }
  for (std::size_t c = 0; c < values.values.size(); ++c) {
    stats.channels.push_back(channel_stats(values.channel_names[c], values.values[c]));
  }
  if (values.values.size() >= 2) {
    centred_products(values.values[0], stats.channels[0].mean, values.values[1], stats.channels[1].mean,
                     stats.cross_cov, stats.se_cross);
    stats.cross_rows = values.channel_names[0];
    stats.cross_cols = values.channel_names[1];
  }
  return stats;
}

EnsembleStats run(const EnsembleConfig& config) { return summarize(config, run_replicas(config)); }

NormalityStat normality_stat(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < kMinNormalitySamples) {
    std::ostringstream msg;
    msg << "normality_stat needs at least " << kMinNormalitySamples << " samples, got " << n;
    throw std::invalid_argument(msg.str());
  }
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (!(m2 > 1e-300) || m2 <= 1e-28 * mean * mean) throw DegenerateSample("normality_stat: zero variance sample");
  NormalityStat out;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  out.composite = static_cast<double>(n) *
                  (out.skewness * out.skewness / 6.0 + out.excess_kurtosis * out.excess_kurtosis / 24.0);
  return out;
}

std::vector<std::string> compared_channels(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::single_channel: return {"cos"};
    case EnsembleMode::dual_channel: return {"cos", "sin"};
    case EnsembleMode::decomposition: return {"combined"};
  }
  return {};
}

ConvergenceReport convergence_study(const EnsembleConfig& config, std::span<const double> epsilons,
                                    const CovModel& target) {
  if (epsilons.empty()) throw std::invalid_argument("convergence_study: no epsilon given");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw std::invalid_argument("convergence_study: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw std::invalid_argument("convergence_study: epsilons must be strictly decreasing");
    }
  }
  if (config.replicas < kMinStatisticalReplicas) {
    throw std::invalid_argument("convergence_study: needs at least 100 replicas");
  }
  // fail fast on every epsilon before spending time on the first one
  for (double eps : epsilons) {
    EnsembleConfig probe = config;
    probe.params.epsilon = eps;
    validate(probe);
  }

  ConvergenceReport report{target, {}, true, 0.0};
  const auto names = compared_channels(config.mode);
  for (double eps : epsilons) {
    EnsembleConfig cfg = config;
    cfg.params.epsilon = eps;
    ConvergenceRow row;
    row.epsilon = eps;
    row.stats = run(cfg);
    const auto& grid = cfg.grid;
    row.max_cov_error = -1.0;
    for (const auto& name : names) {
      const auto& ch = row.stats.channel(name);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
          const auto ii = static_cast<Eigen::Index>(i);
          const auto jj = static_cast<Eigen::Index>(j);
          const double err = std::abs(ch.cov(ii, jj) - cov(target, grid[i], grid[j]));
          if (err > row.max_cov_error) {
            row.max_cov_error = err;
            row.se_max_cov_error = ch.se_cov(ii, jj);
            row.worst_channel = name;
            row.worst_i = i;
            row.worst_j = j;
          }
        }
      }
    }
    if (row.stats.cross_cov.size() > 0) {
      Eigen::Index bi = 0;
      Eigen::Index bj = 0;
      row.max_abs_cross = row.stats.cross_cov.cwiseAbs().maxCoeff(&bi, &bj);
      row.se_max_abs_cross = row.stats.se_cross(bi, bj);
    } else {
      row.max_abs_cross = std::numeric_limits<double>::quiet_NaN();
      row.se_max_abs_cross = std::numeric_limits<double>::quiet_NaN();
    }
    const auto& first = row.stats.channel(names.front());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      row.normality.push_back(first.normality.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                      : first.normality[i].composite);
    }
    report.rows.push_back(std::move(row));
  }
  if (report.rows.size() >= 2) {
    const auto& a = report.rows.front();
    const auto& b = report.rows.back();
    report.trend_margin = std::sqrt(a.se_max_cov_error * a.se_max_cov_error + b.se_max_cov_error * b.se_max_cov_error);
    report.trend_ok = b.max_cov_error <= a.max_cov_error + report.trend_margin;
  }
  return report;
}

}  // namespace ksapprox
