#include "ksapprox/kernel_primitives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ksapprox/detail/gauss_legendre.hpp"
#include "ksapprox/kernels.hpp"
#include "ksapprox/special.hpp"

namespace ksapprox {

namespace {

constexpr int kGrading = 6;
constexpr std::size_t kAdaptiveEdge = 8;

struct MappedPoint {
  double z;
  double gap;   // 1 - z without cancellation
  double dzdw;
};

MappedPoint map_w(double w) {
  const double a = std::pow(w, kGrading);
  const double b = std::pow(1.0 - w, kGrading);
  const double den = a + b;
  const double dz = kGrading * std::pow(w, kGrading - 1) * std::pow(1.0 - w, kGrading - 1) / (den * den);
  return {a / den, b / den, dz};
}

double unmap_z(double z) {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double r = std::pow(z / (1.0 - z), 1.0 / kGrading);
  return r / (1.0 + r);
}

}  // namespace

FbmPrimitive::FbmPrimitive(double H, double quad_tol, std::size_t intervals)
    : hurst_(H), exponent_(0.5 * (H + 1.0)), intervals_(intervals) {
  if (!(H > 0.0 && H < 2.0)) throw std::invalid_argument("FbmPrimitive: H must lie in (0, 2)");
  if (intervals < 16) throw std::invalid_argument("FbmPrimitive: need at least 16 intervals");
  value_.assign(intervals + 1, 0.0);
  slope_.assign(intervals + 1, 0.0);
  if (H == 1.0) return;  // profile is z itself; handled analytically

  auto integrand = [&](double w) {
    const auto p = map_w(w);
    if (p.z <= 0.0 || p.gap <= 0.0) return 0.0;
    return fbm_kernel_gap(H, p.z, p.gap, quad_tol) * p.dzdw;
  };
  const double h = 1.0 / static_cast<double>(intervals);
  std::uint64_t nodes = 0;
  for (std::size_t i = 0; i < intervals; ++i) {
    const double lo = h * static_cast<double>(i);
    const double hi = (i + 1 == intervals) ? 1.0 : h * static_cast<double>(i + 1);
    const bool edge = i < kAdaptiveEdge || i + kAdaptiveEdge >= intervals;
    const double piece = edge ? detail::adaptive_gl15(integrand, lo, hi, quad_tol, 1e-300, nodes).value
                              : detail::gl15(integrand, lo, hi);
    value_[i + 1] = value_[i] + piece;
    if (i > 0) slope_[i] = integrand(lo);
  }
  // slopes vanish at both ends of the w grid (the grading outpaces the
  // kernel singularities)
  slope_.front() = 0.0;
  slope_.back() = 0.0;
}

double FbmPrimitive::profile_integral(double z) const {
  if (hurst_ == 1.0) return std::clamp(z, 0.0, 1.0);
  const double w = unmap_z(z);
  const double scaled = w * static_cast<double>(intervals_);
  std::size_t i = static_cast<std::size_t>(scaled);
  if (i >= intervals_) return value_.back();
  const double u = scaled - static_cast<double>(i);
  const double h = 1.0 / static_cast<double>(intervals_);
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
  const double h10 = u3 - 2.0 * u2 + u;
  const double h01 = -2.0 * u3 + 3.0 * u2;
  const double h11 = u3 - u2;
  return h00 * value_[i] + h10 * h * slope_[i] + h01 * value_[i + 1] + h11 * h * slope_[i + 1];
}

double FbmPrimitive::operator()(double t, double s) const {
  if (t <= 0.0 || s <= 0.0) return 0.0;
  return std::pow(t, exponent_) * profile_integral(s >= t ? 1.0 : s / t);
}

LeiNualartPrimitive::LeiNualartPrimitive(double H) : hurst_(H), c_(0.5 * (1.0 - H)) {
  if (!(H > 0.0 && H < 2.0)) throw std::invalid_argument("LeiNualartPrimitive: H must lie in (0, 2)");
  psi_at_2_ = psi_series(2.0);
  upper_gamma_at_2_ = upper_incomplete_gamma(c_, 2.0);
  const std::size_t n = static_cast<std::size_t>((kScaledGammaEnd - 2.0) / kScaledGammaStep + 0.5);
  scaled_gamma_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double y = 2.0 + kScaledGammaStep * static_cast<double>(i);
    scaled_gamma_[i] = upper_incomplete_gamma(c_, y) * std::exp(y) * std::pow(y, 1.0 - c_);
  }
}

double LeiNualartPrimitive::upper_gamma(double y) const {
  // g(y) = Gamma(c, y) e^y y^{1-c} is smooth and slowly varying with
  // g' = g (1 + (1 - c)/y) - 1, so cubic Hermite on a uniform grid is enough.
  const double scaled = (y - 2.0) / kScaledGammaStep;
  std::size_t i = static_cast<std::size_t>(scaled);
  if (i + 1 >= scaled_gamma_.size()) i = scaled_gamma_.size() - 2;
  const double u = scaled - static_cast<double>(i);
  const double h = kScaledGammaStep;
  const double y0 = 2.0 + h * static_cast<double>(i);
  const double y1 = y0 + h;
  const double g0 = scaled_gamma_[i];
  const double g1 = scaled_gamma_[i + 1];
  const double d0 = g0 * (1.0 + (1.0 - c_) / y0) - 1.0;
  const double d1 = g1 * (1.0 + (1.0 - c_) / y1) - 1.0;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double g = (2.0 * u3 - 3.0 * u2 + 1.0) * g0 + (u3 - 2.0 * u2 + u) * h * d0 +
                   (-2.0 * u3 + 3.0 * u2) * g1 + (u3 - u2) * h * d1;
  return g * std::exp(-y) * std::pow(y, c_ - 1.0);
}

double LeiNualartPrimitive::psi_series(double y) const {
  // sum_{k>=1} (-1)^{k+1} y^{k+c} / (k! (k+c))
  double term = 1.0;  // y^k / k!
  double sum = 0.0;
  for (int k = 1; k < 80; ++k) {
    term *= y / k;
    const double add = ((k % 2 == 1) ? term : -term) / (k + c_);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return std::pow(y, c_) * sum;
}

double LeiNualartPrimitive::psi(double y) const {
  if (y <= 0.0) return 0.0;
  if (y <= 2.0) return psi_series(y);
  double value = psi_at_2_ + std::pow(2.0, c_) * expm1_ratio(c_, std::log(0.5 * y)) - upper_gamma_at_2_;
  if (y <= kScaledGammaEnd) value += upper_gamma(y);
  return value;
}

double LeiNualartPrimitive::operator()(double t, double s) const {
  if (t <= 0.0 || s <= 0.0) return 0.0;
  return std::pow(t, -c_) * psi(s * t);
}

double LeiNualartPrimitive::power_tail(double s) const {
  if (std::abs(c_) < 1e-3) return expm1_ratio(c_, std::log(s));
  return (std::pow(s, c_) - 1.0) / c_;
}

}  // namespace ksapprox
