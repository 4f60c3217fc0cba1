#pragma once

#include <cmath>
#include <limits>

#include "damh/errors.hpp"

namespace damh {

inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

/// Standard normal CDF via the complementary error function.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

/// log Phi(x), stable for very negative arguments.
/// erfc stays normal down to x ~ -37; beyond that use the Mills-ratio
/// asymptotic expansion log Phi(x) = -x^2/2 - log(-x) - log sqrt(2 pi) + log(1 - 1/x^2 + ...).
inline double log_norm_cdf(double x) {
  if (x > -34.0) {
    double p = norm_cdf(x);
    if (p > 0.0) return std::log(p);
  }
  const double z2 = x * x;
  const double series = -1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-x) - kLogSqrt2Pi + std::log1p(series);
}

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Newton refinement against norm_cdf; ~1e-15 relative in the bulk).
inline double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_ppf: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = norm_cdf(x) - p;
  x -= e / norm_pdf(x);
  return x;
}

/// Metropolis accept-reject function F(u) = min(1, e^u).
inline double mh_accept_fn(double u) { return u >= 0.0 ? 1.0 : std::exp(u); }

/// log(1 + e^x) without overflow.
inline double log1pexp(double x) {
  if (x <= -37.0) return std::exp(x);
  if (x <= 18.0) return std::log1p(std::exp(x));
  if (x <= 33.3) return x + std::exp(-x);
  return x;
}

inline double logistic_sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace damh
