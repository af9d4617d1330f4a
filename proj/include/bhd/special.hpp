#pragma once

namespace bhd {

/// Inverse error function on (-1, 1): bracketing bisection to get close,
/// then Newton steps on std::erf until |dx| <= 1e-12 * max(1, |x|).
double erf_inv(double y);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly (series below a + 1, Lentz continued fraction above) so that
/// small tail values keep full relative precision.
double gamma_q(double a, double x);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace bhd
