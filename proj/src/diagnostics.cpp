#include "damh/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "damh/errors.hpp"

namespace damh::diag {

namespace {

double autocov(std::span<const double> x, double mean, std::size_t lag) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) acc += (x[t] - mean) * (x[t + lag] - mean);
  return acc / static_cast<double>(n);
}

}  // namespace

EssResult ess_geyer(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw DomainError("ess_geyer: need at least 10 points");
  for (double v : series)
    if (!std::isfinite(v)) throw DomainError("ess_geyer: non-finite value in series");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  const double gamma0 = autocov(series, mean, 0);
  EssResult res;
  // a constant series leaves only rounding residue in gamma0
  if (gamma0 <= 1e-24 * (1.0 + mean * mean)) {
    res.ess = static_cast<double>(n);
    res.iact = 1.0;
    res.degenerate = true;
    return res;
  }

  const std::size_t max_lag = n / 2;
  double sum_pairs = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  std::size_t m = 0;
  for (;; ++m) {
    const std::size_t l0 = 2 * m, l1 = 2 * m + 1;
    if (l0 > max_lag) break;
    double pair = autocov(series, mean, l0);
    if (l1 <= max_lag) pair += autocov(series, mean, l1);
    if (pair <= 0.0) break;               // initial positive sequence
    pair = std::min(pair, prev_pair);     // monotone non-increasing
    sum_pairs += pair;
    prev_pair = pair;
  }
  res.truncation_lag = static_cast<int>(2 * m);
  res.iact = std::max(1.0, (2.0 * sum_pairs - gamma0) / gamma0);
  res.ess = static_cast<double>(n) / res.iact;
  return res;
}

std::vector<EssResult> ess_per_coordinate(const Eigen::MatrixXd& samples) {
  std::vector<EssResult> out;
  out.reserve(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    Eigen::VectorXd col = samples.col(j);
    out.push_back(ess_geyer(std::span<const double>(col.data(), col.size())));
  }
  return out;
}

double ess_harmonic_mean(const std::vector<EssResult>& per_coord) {
  if (per_coord.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : per_coord) {
    if (r.ess <= 0.0) return 0.0;
    acc += 1.0 / r.ess;
  }
  return static_cast<double>(per_coord.size()) / acc;
}

double ess_min(const std::vector<EssResult>& per_coord) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : per_coord) m = std::min(m, r.ess);
  return std::isfinite(m) ? m : 0.0;
}

double esjd(const ChainTrace& trace) { return trace.counters.esjd(); }

AcceptanceSummary acceptance_summary(const Counters& c) {
  AcceptanceSummary s;
  s.alpha1 = c.alpha1_hat();
  s.alpha2given1 = c.alpha2given1_hat();
  s.alpha12 = s.alpha1 * s.alpha2given1;
  return s;
}

double relative_efficiency(double ess_a, double cost_a, double ess_b, double cost_b) {
  if (cost_a <= 0.0 || cost_b <= 0.0 || ess_b <= 0.0)
    throw DomainError("relative_efficiency: costs and reference ESS must be positive");
  return (ess_a / cost_a) / (ess_b / cost_b);
}

}  // namespace damh::diag
