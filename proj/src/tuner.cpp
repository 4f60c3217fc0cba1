#include "damh/tuner.hpp"

#include <algorithm>
#include <cmath>

#include "damh/errors.hpp"

namespace damh::tuner {

namespace {
constexpr double kSigma2Cap = 3.3;
constexpr double kSigma2Floor = 1.0;
}  // namespace

Step1Result step1_pick_particles(
    const std::vector<int>& candidate_m,
    const std::function<std::vector<double>(int m)>& sigma2_at_points) {
  if (candidate_m.empty()) throw DomainError("step1: empty candidate list");
  std::vector<int> ms = candidate_m;
  std::sort(ms.begin(), ms.end());

  Step1Result res;
  for (int m : ms) {
    std::vector<double> s2 = sigma2_at_points(m);
    if (s2.empty()) throw DomainError("step1: evaluator returned no points");
    double lo = s2[0], hi = s2[0];
    for (double v : s2) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    res.observed[m] = {lo, hi};
  }

  auto pick = [&](int m) {
    res.m_star = m;
    res.sigma2_min = res.observed[m].first;
    res.sigma2_max = res.observed[m].second;
  };
  // ideal: smallest m with sigma2 range inside [1, 3.3]
  for (int m : ms) {
    const auto& [lo, hi] = res.observed[m];
    if (hi <= kSigma2Cap && lo >= kSigma2Floor) {
      pick(m);
      return res;
    }
  }
  // fallback: smallest m meeting the 3.3 cap alone
  for (int m : ms) {
    if (res.observed[m].second <= kSigma2Cap) {
      pick(m);
      res.flagged = true;
      return res;
    }
  }
  // nothing meets the cap: largest m, flagged
  pick(ms.back());
  res.flagged = true;
  return res;
}

double step2_pick_scaling(const std::vector<double>& gammas,
                          const std::function<ShortRunMetric(double gamma)>& run,
                          std::vector<ShortRunMetric>* metrics) {
  if (gammas.empty()) throw DomainError("step2: empty candidate list");
  std::vector<double> gs = gammas;
  std::sort(gs.begin(), gs.end());
  double best_gamma = gs.front();
  double best = -1.0;
  for (double g : gs) {
    ShortRunMetric m = run(g);
    if (metrics) metrics->push_back(m);
    if (m.mess_per_cost > best) {  // strict: ties keep the smaller gamma
      best = m.mess_per_cost;
      best_gamma = g;
    }
  }
  return best_gamma;
}

int step3_pick_particles(const std::vector<int>& ms,
                         const std::function<ShortRunMetric(int m)>& run,
                         std::vector<ShortRunMetric>* metrics) {
  if (ms.empty()) throw DomainError("step3: empty candidate list");
  std::vector<int> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  int best_m = sorted.front();
  double best = -1.0;
  for (int m : sorted) {
    ShortRunMetric r = run(m);
    if (metrics) metrics->push_back(r);
    if (r.mess_per_cost > best) {
      best = r.mess_per_cost;
      best_m = m;
    }
  }
  return best_m;
}

}  // namespace damh::tuner
