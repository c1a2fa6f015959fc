// SPDX-License-Identifier: Apache-2.0
#include "isacee/bounds.hpp"

#include <cmath>

namespace isacee {

namespace {
void require_positive_refs(std::initializer_list<double> refs) {
  for (double r : refs)
    if (!(r > 0.0)) throw std::domain_error("product bound: reference values must be positive");
}
}  // namespace

double bilinear_lower(double x, double y, double x_ref, double y_ref) {
  require_positive_refs({x_ref, y_ref});
  const double s = x_ref + y_ref;
  return s * (x + y) - 0.5 * (s * s + x * x + y * y);
}

double bilinear_upper(double x, double y, double x_ref, double y_ref) {
  require_positive_refs({x_ref, y_ref});
  return 0.5 * (y_ref / x_ref) * x * x + 0.5 * (x_ref / y_ref) * y * y;
}

double triple_lower(double t, double x, double y, double t_ref, double x_ref, double y_ref) {
  require_positive_refs({t_ref, x_ref, y_ref});
  const double sx = std::sqrt(x), sy = std::sqrt(y);
  const double sxr = std::sqrt(x_ref), syr = std::sqrt(y_ref);
  const double s = sxr + syr;
  // The (sqrt(x))^2 terms inside the inner bilinear bounds reduce to x itself.
  const double lb_tx = (t_ref + sxr) * (t + sx) - 0.5 * ((t_ref + sxr) * (t_ref + sxr) + t * t + x);
  const double lb_ty = (t_ref + syr) * (t + sy) - 0.5 * ((t_ref + syr) * (t_ref + syr) + t * t + y);
  return s * (lb_tx + lb_ty) -
         0.5 * (s * s * t + bilinear_upper(t, x, t_ref, x_ref) + bilinear_upper(t, y, t_ref, y_ref));
}

double triple_upper(double t, double x, double y, double t_ref, double x_ref, double y_ref) {
  require_positive_refs({t_ref, x_ref, y_ref});
  return 0.5 * std::sqrt(y_ref / x_ref) * bilinear_upper(t, x, t_ref, x_ref) +
         0.5 * std::sqrt(x_ref / y_ref) * bilinear_upper(t, y, t_ref, y_ref);
}

RateLbCoeffs rate_lb_coeffs(double num, double den) {
  if (!(num > 0.0) || !(den > 0.0))
    throw std::domain_error("rate_lb_coeffs: expansion numerator/denominator must be positive");
  const double s = num + den;
  return {std::log1p(num / den) + 2.0 * num / s, num * num / s, num / (s * den)};
}

RateUbCoeffs rate_ub_coeffs(double num, double den) {
  if (!(num > 0.0) || !(den > 0.0))
    throw std::domain_error("rate_ub_coeffs: expansion numerator/denominator must be positive");
  const double s = num + den;
  return {std::log1p(num / den) - num / s, den / s, 1.0 / num};
}

}  // namespace isacee
