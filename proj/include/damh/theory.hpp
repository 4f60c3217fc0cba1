#pragma once

#include <string>
#include <vector>

#include "damh/errors.hpp"

namespace damh::theory {

/// Scalar summary of a deterministic approximation's error: beta1 is the
/// expected excess curvature of s = log(pi_a/pi), beta2 the root-mean-square
/// gradient discrepancy. Always |beta1| <= beta2.
struct ApproxQuality {
  double beta1 = 0.0;
  double beta2 = 0.0;

  ApproxQuality() = default;
  ApproxQuality(double b1, double b2);

  /// Correlation of the limiting (Q, S) pair; undefined (0 by convention)
  /// when beta2 == 0 since S is then degenerate.
  double rho() const { return beta2 > 0.0 ? -beta1 / beta2 : 0.0; }
};

/// A point in the tuning space: limiting jump parameter mu, log-noise
/// variance sigma2, and relative surrogate cost eta.
struct TuningPoint {
  double mu = 0.0;
  double sigma2 = 0.0;
  double eta = 0.0;

  TuningPoint() = default;
  TuningPoint(double mu_, double sigma2_, double eta_);
};

struct EfficiencyPoint {
  TuningPoint tuning;
  double alpha1 = 1.0;
  double alpha2given1 = 1.0;
  double alpha12 = 1.0;
  double eff = 0.0;
  double eff_rel = 0.0;
};

enum class Mode { dapm, da };

/// G(m, v) = E[min(1, e^Z)] for Z ~ N(m, v)
///         = Phi(m/sqrt(v)) + exp(m + v/2) Phi(-sqrt(v) - m/sqrt(v)),
/// with G(m, 0) = min(1, e^m). The exponential factor is evaluated in log
/// space when m + v/2 is large.
double gauss_g(double m, double v);

/// Limiting Stage One acceptance rate
/// alpha1 = G(-(mu^2/2)(1 - beta1), mu^2 (1 + beta2^2 - 2 beta1)).
double alpha1(double mu, const ApproxQuality& q);

/// Limiting overall acceptance rate: one-dimensional Gauss-Hermite
/// expectation over xi ~ N(0,1) of
///   G(-(1-b1)mu^2/2 + mu (b2 - b1/b2) xi, mu^2 (1 - b1^2/b2^2))
/// * G(-sigma2 - mu^2 b1/2 - mu b2 xi, 2 sigma2).
/// When beta2 == 0 the S term is degenerate and the product form
/// G(-mu^2/2, mu^2) G(-sigma2, 2 sigma2) is used. sigma2 == 0 recovers the
/// delayed-acceptance (exact target) limit.
double alpha12(double mu, double sigma2, const ApproxQuality& q);

/// sigma2 -> 0 limit of alpha12: second factor becomes min(1, exp(.)).
double alpha12_da(double mu, const ApproxQuality& q);

/// Expectation of the second-stage factor alone, E[F(W_Delta - S)]; upper
/// bound for alpha12.
double stage2_factor_bound(double mu, double sigma2, const ApproxQuality& q);

/// DAPsMRWM efficiency Eff = mu^2 sigma2 alpha12 / (eta sigma2 + alpha1).
double eff_dapm(const TuningPoint& t, const ApproxQuality& q);

/// DARWM efficiency Eff = mu^2 alpha12(mu, 0) / (eta + alpha1).
double eff_da(double mu, const ApproxQuality& q, double eta);

/// Pseudo-marginal RWM efficiency 2 mu^2 sigma2 Phi(-sqrt(mu^2+2 sigma2)/2).
double eff_pm(double mu, double sigma2);

/// Plain RWM efficiency 2 mu^2 Phi(-mu/2).
double eff_rwm(double mu);

struct Baseline {
  double mu = 0.0;
  double sigma2 = 0.0;  // unused for the RWM baseline
  double eff = 0.0;
};

/// Global optimum of eff_pm / eff_rwm, computed once by the same grid +
/// Nelder-Mead machinery used by optimize().
const Baseline& pm_baseline();
const Baseline& rwm_baseline();

/// Eff divided by the matching baseline optimum.
double eff_rel(const TuningPoint& t, const ApproxQuality& q, Mode mode);

struct OptimizeResult {
  TuningPoint tuning;          // optimal point (eta copied from input)
  EfficiencyPoint point;       // rates and efficiency at the optimum
  bool boundary_warning = false;
};

/// Deterministic coarse grid scan (mu in [0.05,12] x sigma2 in [0.05,8],
/// 120 x 80 log-spaced) followed by Nelder-Mead refinement from the best
/// cell. Mode da optimizes over mu only.
OptimizeResult optimize(const ApproxQuality& q, double eta, Mode mode);

/// Limiting expected squared jumping distance J = alpha12 (mu/I)^2.
double esjd_limit(double mu, double sigma2, const ApproxQuality& q, double i_const);

/// Rates and efficiency at one tuning point (one CSV row of the theory scan).
EfficiencyPoint evaluate(const TuningPoint& t, const ApproxQuality& q, Mode mode);

struct GridSpec {
  double mu_lo = 0.05, mu_hi = 12.0;
  int mu_n = 120;
  double sigma2_lo = 0.05, sigma2_hi = 8.0;
  int sigma2_n = 80;
  bool log_spaced = true;
};

std::vector<EfficiencyPoint> grid_scan(const ApproxQuality& q, double eta,
                                       Mode mode, const GridSpec& grid);

/// argmax over mu of the efficiency at fixed sigma2 (used by the tuning
/// heuristics to probe the insensitivity of mu_hat to sigma2).
double optimal_mu_at_sigma2(double sigma2, const ApproxQuality& q, double eta);

}  // namespace damh::theory
