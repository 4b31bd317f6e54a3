#pragma once

// Poisson-driven functionals
//   Y(t)  = (2/eps) int f(t, s) cos(theta N_{2s/eps^2}) ds
//   Y~(t) = (2/eps) int f(t, s) sin(theta N_{2s/eps^2}) ds
// computed segment by segment: N is constant between rescaled jumps, so only
// the kernel has to be integrated.

#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ksapprox/kernels.hpp"
#include "ksapprox/poisson_path.hpp"

namespace ksapprox {

enum class Route {
  automatic,   // closed-form antiderivatives for the analytic kernels
  quadrature,  // adaptive Gauss-Legendre inside every segment
};

enum class Channel { cos, sin };

std::string to_string(Channel channel);

struct ApproxParams {
  double epsilon = 0.1;
  Theta theta{std::numbers::pi / 2};
  /// s-axis cut-off for kernels supported on the whole half line. When
  /// unset it is derived from tail_tol.
  std::optional<double> truncation_radius;
  /// Tail tolerance for the cut-off; default 0.05 sqrt(Var X(T)).
  std::optional<double> tail_tol;
  /// Relative tolerance of the per-segment quadrature.
  double quad_tol = 1e-8;
  /// Kernel (or antiderivative) evaluations allowed per transform.
  std::uint64_t max_nodes = 4'000'000'000ULL;
  /// Refuse runs whose expected event count 2 s_max / eps^2 exceeds this.
  double max_expected_events = 1e9;
  Route route = Route::automatic;
};

struct PathValues {
  std::vector<double> grid;
  std::vector<double> cos_values;
  std::vector<double> sin_values;
  ApproxParams params;
  PathTag tag;
  KernelKind kernel_kind = KernelKind::tabulated;
  double hurst = 0.0;

  std::span<const double> channel(Channel c) const {
    return c == Channel::cos ? std::span<const double>(cos_values) : std::span<const double>(sin_values);
  }
};

/// Smallest R with (4 / (1 - cos theta)) int_R^inf f(T, r)^2 dr <= tail_tol^2,
/// using int_R^inf (1 - e^{-rT})^2 r^{-(1+H)} dr <= R^{-H} / H for the
/// Lei-Nualart kernel. Compactly supported kernels return the end of their
/// support at `horizon_time`.
double truncation_radius_for(const KernelSpec& kernel, const Theta& theta, double tail_tol,
                             double horizon_time);

/// 0.05 sqrt(Var X(T)).
double default_tail_tol(double H, double horizon_time);

namespace detail {

/// Per-path accumulator for one kernel; see Transformer::start.
class TransformPass {
 public:
  virtual ~TransformPass() = default;
  /// Segment with phase factors cos(theta k), sin(theta k).
  virtual void consume(const Segment& seg, double cos_k, double sin_k) = 0;
  /// Writes (2/eps)-scaled values in grid order.
  virtual void finish(std::span<double> cos_out, std::span<double> sin_out) = 0;
};

}  // namespace detail

/// A kernel, a time grid and approximation parameters, validated once and
/// reused for any number of paths.
class Transformer {
 public:
  /// Throws std::invalid_argument on bad parameters or an inadmissible theta,
  /// HorizonGuard if the expected event count exceeds the ceiling.
  Transformer(KernelSpec kernel, std::vector<double> grid, ApproxParams params);
  ~Transformer();
  Transformer(Transformer&&) noexcept;
  Transformer& operator=(Transformer&&) noexcept;

  const KernelSpec& kernel() const { return kernel_; }
  const std::vector<double>& grid() const { return grid_; }
  const ApproxParams& params() const { return params_; }
  Route route() const { return route_; }

  /// Resolved cut-off (Lei-Nualart) or end of support.
  double truncation_radius() const { return s_max_; }
  /// Right end of the s range the transform integrates over.
  double s_max() const { return s_max_; }
  /// Internal Poisson time needed: 2 s_max / eps^2.
  double required_horizon() const;

  /// Transform over a stored path (OutOfHorizon if it is too short).
  PathValues operator()(const PoissonPath& path) const;

  /// Transform over a path generated on the fly from (seed, stream).
  PathValues simulate(std::uint64_t seed, std::uint64_t stream) const;

  std::unique_ptr<detail::TransformPass> start() const;

 private:
  struct Shared;

  PathValues package(PathTag tag, std::vector<double> c, std::vector<double> s) const;

  KernelSpec kernel_;
  std::vector<double> grid_;
  ApproxParams params_;
  Route route_;
  double s_max_;
  std::shared_ptr<const Shared> shared_;
};

/// Runs several transformers over one segment stream. The stream must cover
/// the largest s_max among them. Output i holds (cos, sin) of transformer i.
void transform_joint(std::span<const Transformer* const> transformers, SegmentStream& segments,
                     std::span<std::vector<double>> cos_out, std::span<std::vector<double>> sin_out);

/// One-shot convenience wrapper around Transformer.
PathValues transform(const KernelSpec& kernel, std::span<const double> grid, const PoissonPath& path,
                     const ApproxParams& params);

/// C1 x + b for a Lei-Nualart channel x and the opposite fBm channel b built
/// from the same path; the limit is sub-fractional Brownian motion.
std::vector<double> subfbm_combine(const PathValues& x_vals, Channel x_channel, const PathValues& b_vals,
                                   Channel b_channel, double H);

}  // namespace ksapprox
