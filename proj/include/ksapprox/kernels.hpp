#pragma once

// Deterministic kernels, covariance models and the constants tying them
// together.
//
// Hurst-type parameters follow the convention H in (0, 2), with fBm
// covariance (t^H + s^H - |t - s|^H) / 2. H = 1 is standard Brownian motion.
// The more common Hurst index in (0, 1) equals H / 2.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ksapprox {

inline constexpr double kDefaultKernelQuadTol = 1e-8;
inline constexpr double kDefaultThetaMargin = 1e-9;

/// Normalising constant of the fBm Volterra kernel,
/// sqrt(H Gamma((3-H)/2) / (Gamma((H+1)/2) Gamma(2-H))).
double d_h(double H);

/// fBm Volterra kernel K^H(t, s), zero for s >= t.
///
/// The inner integral has an integrable singularity at u = s and is
/// computed after the change of variables u = s + (t - s) v^(2/(H+1)).
/// The kernel itself blows up like (t - s)^((H-1)/2) at s -> t when H < 1
/// and like s^(-|1-H|/2) at s -> 0 for every H != 1; evaluating exactly at
/// one of those points throws SingularPoint.
double fbm_kernel(double H, double t, double s, double quad_tol = kDefaultKernelQuadTol);

/// Same kernel parameterised by s and gap = t - s, for callers that know the
/// distance to the diagonal more accurately than t - s would give it.
double fbm_kernel_gap(double H, double s, double gap, double quad_tol = kDefaultKernelQuadTol);

/// Lei-Nualart kernel (1 - e^{-r t}) r^{-(1+H)/2}.
double lei_nualart_kernel(double H, double t, double r);

/// Variance of the Lei-Nualart process at time t (any H in (0, 2), including
/// H = 1 where it equals 2 ln 2 t).
double lei_nualart_variance(double H, double t);

enum class CovKind { fbm, sub_fbm, lei_nualart_x };

struct CovModel {
  CovKind kind;
  double H;
};

std::string to_string(CovKind kind);

/// Closed-form covariance. LeiNualartX at H = 1 throws UnsupportedParameter.
double cov(const CovModel& model, double t, double s);

enum class DecompositionRegime {
  sub_from_fbm,  // H in (0,1): C1^2 cov_X + cov_fBm = cov_sub
  fbm_from_sub,  // H in (1,2): C2^2 cov_X + cov_sub = cov_fBm
};

double decomposition_constant(double H, DecompositionRegime regime);

/// Outcome of the admissibility check on the Poisson phase angle.
struct ThetaReport {
  bool admissible = true;
  bool in_range = true;
  /// Indices i for which |cos((2i+1) theta) - 1| <= margin (H <= 1/2 only).
  std::vector<int> violated_indices;
  std::string reason;
};

/// Range check theta in (0, pi) U (pi, 2 pi) and, for H <= 1/2, the
/// tightness condition cos((2i+1) theta) != 1 for 0 <= i <= floor(floor(1/H)/2).
ThetaReport validate_theta(double theta, double H, double margin = kDefaultThetaMargin);

/// Phase angle known to lie in (0, pi) U (pi, 2 pi).
class Theta {
 public:
  explicit Theta(double radians, double margin = kDefaultThetaMargin);
  double value() const { return value_; }
  double one_minus_cos() const;

 private:
  double value_;
};

enum class KernelKind { fbm_volterra, lei_nualart, tabulated };
enum class Interpolation { linear, step };

std::string to_string(KernelKind kind);

/// User-supplied kernel f(t, s) = table(s), optionally gated to s <= t.
/// Linear tables hold one value per grid node; step tables hold one value
/// per cell [grid[i], grid[i+1]). Zero outside the grid.
struct TabulatedTable {
  std::vector<double> grid;
  std::vector<double> values;
  Interpolation interpolation = Interpolation::linear;
  bool gate_at_t = false;
};

/// Identifies a kernel f(t, .) in L^2(R+).
class KernelSpec {
 public:
  static KernelSpec fbm_volterra(double H, double quad_tol = kDefaultKernelQuadTol);
  static KernelSpec lei_nualart(double H);
  static KernelSpec tabulated(TabulatedTable table);

  KernelKind kind() const { return kind_; }
  /// NaN for tabulated kernels.
  double hurst() const { return hurst_; }
  double quad_tol() const { return quad_tol_; }
  const TabulatedTable& table() const { return table_; }

  double operator()(double t, double s) const;
  /// Evaluation with gap = t - s supplied by the caller.
  double evaluate_with_gap(double t, double s, double gap) const;

  /// Right end of the s-support for time t (+inf for Lei-Nualart).
  double support_end(double t) const;
  /// Points in (lo, hi) where f(t, .) is not smooth.
  std::vector<double> breakpoints(double t, double lo, double hi) const;
  /// e such that f(t, s) ~ s^(-e) near s = 0 (<= 0: bounded there).
  double exponent_at_zero() const;
  /// e such that f(t, s) ~ (t - s)^(-e) near s = t (<= 0: bounded there).
  double exponent_at_t() const;
  /// H used for theta admissibility (1 for tabulated kernels, which only
  /// need the range check).
  double admissibility_h() const;

  std::string describe() const;

 private:
  KernelSpec() = default;

  KernelKind kind_ = KernelKind::tabulated;
  double hurst_ = 1.0;
  double quad_tol_ = kDefaultKernelQuadTol;
  TabulatedTable table_;
};

}  // namespace ksapprox
