#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace damh::tuner {

struct Step1Result {
  int m_star = 0;
  double sigma2_min = 0.0;  // range observed at the selected m
  double sigma2_max = 0.0;
  bool flagged = false;     // fell back past the ideal [1, 3.3] band
  std::map<int, std::pair<double, double>> observed;  // m -> (min, max) sigma2
};

/// Pick the particle count from log-likelihood variances at representative
/// parameter points: the smallest m whose max sigma2 <= 3.3, preferring
/// candidates whose min sigma2 >= 1; if no candidate meets the 3.3 cap the
/// largest m is returned, flagged. sigma2_at_points(m) returns one variance
/// per representative point.
Step1Result step1_pick_particles(
    const std::vector<int>& candidate_m,
    const std::function<std::vector<double>(int m)>& sigma2_at_points);

struct ShortRunMetric {
  double gamma = 0.0;
  int m = 0;
  double min_ess = 0.0;
  double modeled_cost = 0.0;   // total modeled cost of the run
  double wall_seconds = 0.0;
  double mess_per_cost = 0.0;  // min ESS per modeled cost unit (selection key)
  double mess_per_second = 0.0;
  double alpha1 = 0.0;
  double alpha2given1 = 0.0;
};

/// Scan scalings at the step-1 particle count; argmax of min-ESS per modeled
/// cost, ties resolved toward the smaller gamma.
double step2_pick_scaling(const std::vector<double>& gammas,
                          const std::function<ShortRunMetric(double gamma)>& run,
                          std::vector<ShortRunMetric>* metrics = nullptr);

/// Scan particle counts at the chosen scaling; ties toward the smaller m.
int step3_pick_particles(const std::vector<int>& ms,
                         const std::function<ShortRunMetric(int m)>& run,
                         std::vector<ShortRunMetric>* metrics = nullptr);

struct TuningReport {
  int m_star = 0;
  double sigma2_min = 0.0;
  double sigma2_max = 0.0;
  bool step1_flagged = false;
  double gamma_hat = 0.0;
  int m_hat = 0;
  std::vector<ShortRunMetric> step2_runs;
  std::vector<ShortRunMetric> step3_runs;
};

}  // namespace damh::tuner
