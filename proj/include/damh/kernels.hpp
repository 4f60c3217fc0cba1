#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "damh/rng.hpp"

namespace damh {

/// Exact target: unnormalized log-density plus the roughness constant
/// I^2 = E[l'(X)^2] used to translate proposal scales into the limiting jump
/// parameter mu. Component derivative hooks are optional and only meaningful
/// for product-form targets.
struct TargetModel {
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> log_density;
  double roughness_i = 1.0;
  std::function<double(double)> comp_dlog;
  std::function<double(double)> comp_d2log;
};

/// Cheap deterministic approximation log pi_a (up to a constant) and its
/// relative evaluation cost eta.
struct SurrogateModel {
  std::function<double(const Eigen::VectorXd&)> log_approx;
  double cost_eta = 0.0;
};

/// One unbiased-on-natural-scale stochastic draw of log pi_hat(x). Estimator
/// noise must come from Stream::estimator only. nominal_sigma2 is advisory
/// (known for synthetic estimators); cost_per_eval feeds the modeled cost.
struct LikelihoodEstimator {
  std::function<double(const Eigen::VectorXd&, SplitRng&)> estimate_log;
  double nominal_sigma2 = 0.0;
  double cost_per_eval = 1.0;
};

/// Gaussian random-walk proposal: either a scalar scale with identity
/// covariance or a full covariance with cached Cholesky factor.
class ProposalSpec {
 public:
  static ProposalSpec isotropic(double lambda, int dim);
  static ProposalSpec covariance(const Eigen::MatrixXd& v);  // must be SPD

  Eigen::VectorXd draw_step(SplitRng& rng) const;
  int dim() const { return dim_; }
  double scale() const { return lambda_; }
  bool is_isotropic() const { return isotropic_; }

 private:
  ProposalSpec() = default;
  bool isotropic_ = true;
  double lambda_ = 1.0;
  int dim_ = 1;
  Eigen::MatrixXd chol_;  // lower factor, full-covariance case
};

/// Current position with cached surrogate and (stochastic or exact) target
/// values. The stochastic cache is the retained realization; it is never
/// re-evaluated at the current point.
struct ChainState {
  Eigen::VectorXd x;
  double log_pa_x = 0.0;
  double log_phat_x = 0.0;
};

struct StepRecord {
  bool stage1_attempted = false;
  bool stage1_accepted = false;
  bool stage2_attempted = false;
  bool stage2_accepted = false;
  int expensive_evals = 0;
  double squared_jump = 0.0;
};

// Log acceptance ratios of the four kernels, exposed separately so exact
// (transition-matrix) stationarity oracles can drive the same arithmetic the
// step functions use.
double rwm_log_ratio(double log_pi_new, double log_pi_old);
double da_stage1_log_ratio(double log_pa_new, double log_pa_old);
double da_stage2_log_ratio(double log_pi_new, double log_pi_old,
                           double log_pa_new, double log_pa_old);
double pm_log_ratio(double log_phat_new, double log_phat_old);
double dapm_stage2_log_ratio(double log_phat_new, double log_phat_old,
                             double log_pa_new, double log_pa_old);

/// Accept/reject with log U <= ratio (ties accept). Always consumes exactly
/// one uniform from the given stream; non-finite ratios reject (or accept for
/// +inf) after the draw.
bool accept_log_ratio(double log_ratio, SplitRng& rng, Stream stream);

StepRecord rwm_step(ChainState& state, const TargetModel& target,
                    const ProposalSpec& proposal, SplitRng& rng);
StepRecord da_step(ChainState& state, const TargetModel& target,
                   const SurrogateModel& surrogate, const ProposalSpec& proposal,
                   SplitRng& rng);
StepRecord pm_step(ChainState& state, const LikelihoodEstimator& estimator,
                   const ProposalSpec& proposal, SplitRng& rng);
StepRecord dapm_step(ChainState& state, const SurrogateModel& surrogate,
                     const LikelihoodEstimator& estimator,
                     const ProposalSpec& proposal, SplitRng& rng);

enum class KernelKind { rwm, pm, da, dapm };

struct KernelConfig {
  KernelKind kind = KernelKind::rwm;
  TargetModel target;
  SurrogateModel surrogate;
  LikelihoodEstimator estimator;
  ProposalSpec proposal = ProposalSpec::isotropic(1.0, 1);
};

struct RunOptions {
  std::int64_t n_iter = 1000;
  std::uint64_t seed = 1;
  int thin = 1;
  std::int64_t burnin = 0;
  Eigen::VectorXd init;      // empty -> zero vector
  std::uint64_t chain_id = 0;
  bool record_trace = true;
};

struct Counters {
  std::int64_t n_iter = 0;
  std::int64_t stage1_attempts = 0;
  std::int64_t stage1_accepts = 0;
  std::int64_t stage2_attempts = 0;
  std::int64_t stage2_accepts = 0;
  std::int64_t expensive_evals = 0;
  double sum_squared_jump = 0.0;
  double wall_seconds = 0.0;
  double modeled_cost = 0.0;

  double alpha1_hat() const {
    return stage1_attempts > 0 ? double(stage1_accepts) / double(stage1_attempts) : 0.0;
  }
  double alpha2given1_hat() const {
    return stage2_attempts > 0 ? double(stage2_accepts) / double(stage2_attempts) : 1.0;
  }
  double alpha12_hat() const { return alpha1_hat() * alpha2given1_hat(); }
  double esjd() const { return n_iter > 0 ? sum_squared_jump / double(n_iter) : 0.0; }
};

/// Recorded (thinned) samples plus aggregate counters. Row 0 is the state at
/// the end of burn-in; subsequent rows are every thin-th iteration.
struct ChainTrace {
  int dim = 0;
  Eigen::MatrixXd samples;
  std::vector<std::int64_t> iters;
  std::vector<double> log_pa;
  std::vector<double> log_phat;
  Counters counters;

  Eigen::VectorXd coordinate(int j) const { return samples.col(j); }
};

ChainTrace run_chain(const KernelConfig& config, const RunOptions& opts);

}  // namespace damh
