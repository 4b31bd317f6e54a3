#pragma once

// Antiderivatives s -> int_0^s f(t, r) dr for the two analytic kernels.
// With them a transform needs one evaluation per Poisson breakpoint instead
// of a quadrature per segment.

#include <cstddef>
#include <vector>

namespace ksapprox {

/// Antiderivative of the fBm Volterra kernel.
///
/// The kernel is self-similar, K(t, s) = t^{(H-1)/2} k(s/t), so
/// int_0^s K(t, r) dr = t^{(H+1)/2} L(min(s/t, 1)) with L(z) = int_0^z k.
/// L is tabulated once on a grid in w, z = w^6 / (w^6 + (1-w)^6), which
/// flattens the algebraic endpoint singularities of k, and read back with
/// cubic Hermite interpolation (slopes from k itself).
class FbmPrimitive {
 public:
  FbmPrimitive(double H, double quad_tol, std::size_t intervals = 2048);

  double hurst() const { return hurst_; }

  /// L(z) for z in [0, 1] (clamped outside).
  double profile_integral(double z) const;

  /// int_0^s K(t, r) dr.
  double operator()(double t, double s) const;

 private:
  double hurst_;
  double exponent_;  // (H+1)/2
  std::size_t intervals_;
  std::vector<double> value_;
  std::vector<double> slope_;  // dL/dw
};

/// Antiderivative of the Lei-Nualart kernel (1 - e^{-rt}) r^{-a}, a = (1+H)/2.
///
/// int_0^s f(t, r) dr = t^{a-1} P(s t) with P(y) = int_0^y (1 - e^{-x}) x^{-a} dx.
/// P uses its power series up to y = 2 and the upper incomplete gamma
/// function beyond (interpolated from a table built at construction). Once y exceeds kTailCut the exponential part is below
/// double precision and increments reduce to the t-independent power law
/// handled by power_tail.
class LeiNualartPrimitive {
 public:
  static constexpr double kTailCut = 40.0;

  explicit LeiNualartPrimitive(double H);

  double hurst() const { return hurst_; }

  /// P(y).
  double psi(double y) const;

  /// int_0^s f(t, r) dr.
  double operator()(double t, double s) const;

  /// (s^{1-a} - 1) / (1 - a) (log s at H = 1): an antiderivative of s^{-a}.
  double power_tail(double s) const;

 private:
  // Gamma(c, y) is tabulated (scaled) on [2, kScaledGammaEnd]; beyond that
  // it is below 1e-26 and dropped.
  static constexpr double kScaledGammaEnd = 60.0;
  static constexpr double kScaledGammaStep = 1.0 / 128;

  double psi_series(double y) const;
  double upper_gamma(double y) const;

  double hurst_;
  double c_;  // 1 - a = (1 - H)/2
  double psi_at_2_;
  double upper_gamma_at_2_;
  std::vector<double> scaled_gamma_;
};

}  // namespace ksapprox
