#pragma once

// Production quadrature: 15-point Gauss-Legendre with local recursive
// bisection. Used by the kernel evaluators and the transform. The
// validation oracle (quad_oracle.hpp) is a separate Gauss-Kronrod code.

#include <array>
#include <cmath>
#include <cstdint>

namespace ksapprox::detail {

struct GaussLegendre15 {
  std::array<double, 15> nodes;    // on [-1, 1], ascending
  std::array<double, 15> weights;

  static const GaussLegendre15& get();
};

/// Fixed 15-point rule on [a, b].
template <class F>
double gl15(F&& f, double a, double b) {
  const auto& rule = GaussLegendre15::get();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < 15; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

struct AdaptiveOutcome {
  double value = 0.0;
  bool converged = true;
};

namespace impl {

template <class F>
double bisect(F& f, double a, double b, double whole, double tol, int depth,
              std::uint64_t& nodes, bool& converged) {
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid);
  const double right = gl15(f, mid, b);
  nodes += 30;
  const double refined = left + right;
  if (std::abs(refined - whole) <= tol || !std::isfinite(refined)) return refined;
  if (depth <= 0 || mid <= a || mid >= b) {
    converged = false;
    return refined;
  }
  const double sub_tol = tol * 0.7071067811865476;
  return bisect(f, a, mid, left, sub_tol, depth - 1, nodes, converged) +
         bisect(f, mid, b, right, sub_tol, depth - 1, nodes, converged);
}

}  // namespace impl

/// Integrates f over [a, b] until successive bisections agree to
/// max(rel_tol * |I|, abs_tol). Adds the number of evaluations to `nodes`.
template <class F>
AdaptiveOutcome adaptive_gl15(F&& f, double a, double b, double rel_tol, double abs_tol,
                              std::uint64_t& nodes, int max_depth = 48) {
  AdaptiveOutcome out;
  if (!(b > a)) return out;
  const double whole = gl15(f, a, b);
  nodes += 15;
  const double tol = std::max(rel_tol * std::abs(whole), abs_tol);
  out.value = impl::bisect(f, a, b, whole, tol, max_depth, nodes, out.converged);
  return out;
}

namespace impl {

// One singular end at most; `left` selects which.
template <class F>
AdaptiveOutcome one_sided(F& f, double a, double b, double exponent, bool left, double rel_tol,
                          double abs_tol, std::uint64_t& nodes) {
  const double length = b - a;
  if (!(exponent > 0.0)) {
    return adaptive_gl15([&](double x) { return f(x, x - a, b - x); }, a, b, rel_tol, abs_tol, nodes);
  }
  const double q = 1.0 / (1.0 - exponent);
  auto mapped = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double vq = std::pow(v, q);
    const double d = length * vq;
    const double jac = length * q * vq / v;
    if (left) return f(a + d, d, length - d) * jac;
    return f(b - d, length - d, d) * jac;
  };
  return adaptive_gl15(mapped, 0.0, 1.0, rel_tol, abs_tol, nodes);
}

}  // namespace impl

/// Integrates f over [a, b] where f may behave like (x - a)^(-left_exponent)
/// near a and like (b - x)^(-right_exponent) near b (exponents < 1). Positive
/// exponents are removed with the substitution x = a + L v^q, q = 1/(1 - e).
/// The callback receives (x, x - a, b - x) with both distances computed
/// without cancellation.
template <class F>
AdaptiveOutcome adaptive_gl15_endpoints(F&& f, double a, double b, double left_exponent,
                                        double right_exponent, double rel_tol, double abs_tol,
                                        std::uint64_t& nodes) {
  AdaptiveOutcome out;
  if (!(b > a)) return out;
  const bool left = left_exponent > 0.0;
  const bool right = right_exponent > 0.0;
  if (!(left && right)) {
    return impl::one_sided(f, a, b, left ? left_exponent : right_exponent, left, rel_tol, abs_tol, nodes);
  }
  const double mid = 0.5 * (a + b);
  const double half = mid - a;
  auto lower = [&](double x, double dl, double dr) { return f(x, dl, (b - mid) + dr); };
  auto upper = [&](double x, double dl, double dr) { return f(x, half + dl, dr); };
  const auto lo = impl::one_sided(lower, a, mid, left_exponent, true, rel_tol, 0.5 * abs_tol, nodes);
  const auto hi = impl::one_sided(upper, mid, b, right_exponent, false, rel_tol, 0.5 * abs_tol, nodes);
  out.value = lo.value + hi.value;
  out.converged = lo.converged && hi.converged;
  return out;
}

}  // namespace ksapprox::detail
