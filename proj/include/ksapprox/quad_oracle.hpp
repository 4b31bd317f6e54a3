#pragma once

// Independent integration oracle. Global adaptive Gauss-Kronrod (10/21)
// with interval splitting at user-declared singular points. It never shares
// rules or subdivision logic with the production quadrature, so kernels and
// transforms can be validated against it.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ksapprox/kernels.hpp"

namespace ksapprox::oracle {

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::uint64_t nodes_used = 0;
  bool converged = false;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct OracleOptions {
  std::uint64_t max_nodes = 4'000'000;
};

/// Integrates f over [a, b]. An infinite b is handled by integrating [a, a+1]
/// directly and the tail through r = a + 1/y, y in (0, 1].
/// Singular points inside (a, b) become fixed interval boundaries. Only
/// interior nodes are ever evaluated, so f need not be defined at a, b or the
/// singular points. Mass closer than one ulp to a non-zero singular point is
/// out of reach; a node rounding onto such a point makes the piece infinite
/// and the result unconverged. Convergence means the summed error estimate
/// is at most `tol` (absolute).
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                     std::span<const double> singular_points = {}, OracleOptions options = {});

/// The kernel functionals below integrate each stretch between singular
/// points in its distance to the nearer end and hand kernels exact gaps, so
/// they are not subject to that limit.

/// Integral over the kernel's domain of k(t, r) k(s, r) dr.
double kernel_inner_product(const KernelSpec& k, double t, double s, double tol);

/// Integral of f(t, r) g(s, r) dr over the common domain.
double cross_inner_product(const KernelSpec& f, double t, const KernelSpec& g, double s, double tol);

/// Integral of (k(t, r) - k(s, r))^2 dr.
double kernel_increment_norm(const KernelSpec& k, double t, double s, double tol);

}  // namespace ksapprox::oracle
