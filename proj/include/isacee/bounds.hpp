// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isacee/common.hpp"

namespace isacee {

// Global product bounds used by the SCA surrogates. Each is tangent to its
// target at the reference point; lower bounds are concave and upper bounds
// convex in the live arguments. References must be strictly positive
// (std::domain_error otherwise).

/// Concave lower bound of x*y: (xr+yr)(x+y) - 0.5[(xr+yr)^2 + x^2 + y^2].
double bilinear_lower(double x, double y, double x_ref, double y_ref);

/// Convex upper bound of x*y: (0.5 yr/xr) x^2 + (0.5 xr/yr) y^2.
double bilinear_upper(double x, double y, double x_ref, double y_ref);

/// Concave lower bound of t*sqrt(x*y), composed from the bilinear bounds on
/// (t, sqrt(x)), (t, sqrt(y)), (t, x) and (t, y).
double triple_lower(double t, double x, double y, double t_ref, double x_ref, double y_ref);

/// Convex upper bound of t*sqrt(x*y):
/// 0.5 sqrt(yr/xr) U(t,x) + 0.5 sqrt(xr/yr) U(t,y).
double triple_upper(double t, double x, double y, double t_ref, double x_ref, double y_ref);

/// Logarithmic-bound coefficients around (N, D) = (numerator, denominator) of a
/// single SINR term, with N, D > 0.
/// Lower bound of ln(1+N/D): A - B/N(.) - C*D(.).
struct RateLbCoeffs {
  double a, b, c;
};
RateLbCoeffs rate_lb_coeffs(double num, double den);

/// Upper bound of ln(1+N/D): A^ + 0.5 B^ (C^ * N(.)^2/D(.) + (1/C^)/D(.)).
struct RateUbCoeffs {
  double a, b, c;
};
RateUbCoeffs rate_ub_coeffs(double num, double den);

}  // namespace isacee
