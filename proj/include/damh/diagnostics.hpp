#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "damh/kernels.hpp"

namespace damh::diag {

struct EssResult {
  double ess = 0.0;
  double iact = 1.0;
  int truncation_lag = 0;
  bool degenerate = false;  // zero-variance series: ESS defined as n
};

/// Effective sample size by Geyer's initial monotone sequence estimator:
/// pair the autocovariances, truncate at the first negative pair, enforce a
/// non-increasing sequence by running minimum, IACT = (2 sum - gamma_0) /
/// gamma_0 and ESS = n / IACT. Autocovariances are direct O(n) sums per lag,
/// computed lazily up to the truncation point (capped at n/2).
EssResult ess_geyer(std::span<const double> series);

std::vector<EssResult> ess_per_coordinate(const Eigen::MatrixXd& samples);
double ess_harmonic_mean(const std::vector<EssResult>& per_coord);
double ess_min(const std::vector<EssResult>& per_coord);

/// Mean squared jump per iteration, taken directly from the step counters.
double esjd(const ChainTrace& trace);

struct AcceptanceSummary {
  double alpha1 = 0.0;
  double alpha2given1 = 0.0;
  double alpha12 = 0.0;
};

AcceptanceSummary acceptance_summary(const Counters& counters);

/// (ess_a / cost_a) / (ess_b / cost_b).
double relative_efficiency(double ess_a, double cost_a, double ess_b, double cost_b);

}  // namespace damh::diag
