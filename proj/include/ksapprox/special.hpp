#pragma once

namespace ksapprox {

/// Gamma function, Lanczos approximation (g = 7, nine terms) with the
/// reflection formula below 1/2. Relative accuracy is about 1e-15 away from
/// the poles; non-positive integers return NaN.
double gamma_fn(double x);

/// log|Gamma(x)| for x > 0.
double log_gamma(double x);

/// Upper incomplete gamma Gamma(s, x) for real s and x > 0, evaluated with
/// the Legendre continued fraction (modified Lentz). Intended for x >= 1;
/// s may be zero or negative.
double upper_incomplete_gamma(double s, double x);

/// expm1(c * L) / c, continuous at c = 0 where it equals L.
double expm1_ratio(double c, double log_value);

}  // namespace ksapprox
