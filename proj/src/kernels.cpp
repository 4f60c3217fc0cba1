#include "damh/kernels.hpp"

#include <chrono>
#include <cmath>

#include "damh/errors.hpp"

namespace damh {

namespace {
// -inf stands for "outside the support"; any arithmetic that meets it must
// reject, never produce NaN that accepts.
double safe_diff(double a, double b) {
  if (std::isinf(a) && a < 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(b) && b < 0.0) return std::numeric_limits<double>::infinity();
  return a - b;
}
}  // namespace

ProposalSpec ProposalSpec::isotropic(double lambda, int dim) {
  if (!(lambda > 0.0)) throw DomainError("ProposalSpec: lambda must be > 0");
  if (dim < 1) throw DomainError("ProposalSpec: dim must be >= 1");
  ProposalSpec p;
  p.isotropic_ = true;
  p.lambda_ = lambda;
  p.dim_ = dim;
  return p;
}

ProposalSpec ProposalSpec::covariance(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() < 1)
    throw DomainError("ProposalSpec: covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success)
    throw DomainError("ProposalSpec: covariance is not positive definite");
  ProposalSpec p;
  p.isotropic_ = false;
  p.dim_ = static_cast<int>(v.rows());
  p.chol_ = llt.matrixL();
  return p;
}

Eigen::VectorXd ProposalSpec::draw_step(SplitRng& rng) const {
  Eigen::VectorXd z(dim_);
  for (int i = 0; i < dim_; ++i) z[i] = rng.normal(Stream::proposal);
  if (isotropic_) return lambda_ * z;
  return chol_ * z;
}

double rwm_log_ratio(double log_pi_new, double log_pi_old) {
  return safe_diff(log_pi_new, log_pi_old);
}

double da_stage1_log_ratio(double log_pa_new, double log_pa_old) {
  return safe_diff(log_pa_new, log_pa_old);
}

double da_stage2_log_ratio(double log_pi_new, double log_pi_old,
                           double log_pa_new, double log_pa_old) {
  // [pi(x*) pi_a(x)] / [pi(x) pi_a(x*)]
  return safe_diff(log_pi_new, log_pi_old) - safe_diff(log_pa_new, log_pa_old);
}

double pm_log_ratio(double log_phat_new, double log_phat_old) {
  return safe_diff(log_phat_new, log_phat_old);
}

double dapm_stage2_log_ratio(double log_phat_new, double log_phat_old,
                             double log_pa_new, double log_pa_old) {
  return safe_diff(log_phat_new, log_phat_old) - safe_diff(log_pa_new, log_pa_old);
}

bool accept_log_ratio(double log_ratio, SplitRng& rng, Stream stream) {
  const double u = rng.uniform(stream);
  if (std::isnan(log_ratio)) return false;
  if (std::isinf(log_ratio)) return log_ratio > 0.0;
  if (log_ratio >= 0.0) return true;
  return std::log(u) <= log_ratio;
}

StepRecord rwm_step(ChainState& state, const TargetModel& target,
                    const ProposalSpec& proposal, SplitRng& rng) {
  StepRecord rec;
  rec.stage1_attempted = true;
  const Eigen::VectorXd step = proposal.draw_step(rng);
  const Eigen::VectorXd x_new = state.x + step;
  double lp_new = target.log_density(x_new);
  if (std::isnan(lp_new)) lp_new = -std::numeric_limits<double>::infinity();
  rec.expensive_evals = 1;
  if (accept_log_ratio(rwm_log_ratio(lp_new, state.log_phat_x), rng, Stream::accept1)) {
    rec.stage1_accepted = true;
    rec.squared_jump = step.squaredNorm();
    state.x = x_new;
    state.log_pa_x = lp_new;
    state.log_phat_x = lp_new;
  }
  return rec;
}

StepRecord da_step(ChainState& state, const TargetModel& target,
                   const SurrogateModel& surrogate, const ProposalSpec& proposal,
                   SplitRng& rng) {
  StepRecord rec;
  rec.stage1_attempted = true;
  const Eigen::VectorXd step = proposal.draw_step(rng);
  const Eigen::VectorXd x_new = state.x + step;
  double lpa_new = surrogate.log_approx(x_new);
  if (std::isnan(lpa_new)) lpa_new = -std::numeric_limits<double>::infinity();
  if (!accept_log_ratio(da_stage1_log_ratio(lpa_new, state.log_pa_x), rng,
                        Stream::accept1))
    return rec;
  rec.stage1_accepted = true;
  rec.stage2_attempted = true;
  // only now pay for the exact target
  double lp_new = target.log_density(x_new);
  if (std::isnan(lp_new)) lp_new = -std::numeric_limits<double>::infinity();
  rec.expensive_evals = 1;
  const double ratio =
      da_stage2_log_ratio(lp_new, state.log_phat_x, lpa_new, state.log_pa_x);
  if (accept_log_ratio(ratio, rng, Stream::accept2)) {
    rec.stage2_accepted = true;
    rec.squared_jump = step.squaredNorm();
    state.x = x_new;
    state.log_pa_x = lpa_new;
    state.log_phat_x = lp_new;
  }
  return rec;
}

StepRecord pm_step(ChainState& state, const LikelihoodEstimator& estimator,
                   const ProposalSpec& proposal, SplitRng& rng) {
  StepRecord rec;
  rec.stage1_attempted = true;
  const Eigen::VectorXd step = proposal.draw_step(rng);
  const Eigen::VectorXd x_new = state.x + step;
  double lphat_new = estimator.estimate_log(x_new, rng);
  if (std::isnan(lphat_new)) lphat_new = -std::numeric_limits<double>::infinity();
  rec.expensive_evals = 1;
  if (accept_log_ratio(pm_log_ratio(lphat_new, state.log_phat_x), rng,
                       Stream::accept1)) {
    rec.stage1_accepted = true;
    rec.squared_jump = step.squaredNorm();
    state.x = x_new;
    state.log_phat_x = lphat_new;  // fresh realization replaces the cache
  }
  return rec;
}

StepRecord dapm_step(ChainState& state, const SurrogateModel& surrogate,
                     const LikelihoodEstimator& estimator,
                     const ProposalSpec& proposal, SplitRng& rng) {
  StepRecord rec;
  rec.stage1_attempted = true;
  const Eigen::VectorXd step = proposal.draw_step(rng);
  const Eigen::VectorXd x_new = state.x + step;
  double lpa_new = surrogate.log_approx(x_new);
  if (std::isnan(lpa_new)) lpa_new = -std::numeric_limits<double>::infinity();
  if (!accept_log_ratio(da_stage1_log_ratio(lpa_new, state.log_pa_x), rng,
                        Stream::accept1))
    return rec;
  rec.stage1_accepted = true;
  rec.stage2_attempted = true;
  double lphat_new = estimator.estimate_log(x_new, rng);
  if (std::isnan(lphat_new)) lphat_new = -std::numeric_limits<double>::infinity();
  rec.expensive_evals = 1;
  const double ratio =
      dapm_stage2_log_ratio(lphat_new, state.log_phat_x, lpa_new, state.log_pa_x);
  if (accept_log_ratio(ratio, rng, Stream::accept2)) {
    rec.stage2_accepted = true;
    rec.squared_jump = step.squaredNorm();
    state.x = x_new;
    state.log_pa_x = lpa_new;
    state.log_phat_x = lphat_new;
  }
  return rec;
}

namespace {

ChainState make_initial_state(const KernelConfig& config, const Eigen::VectorXd& x0,
                              SplitRng& rng) {
  ChainState s;
  s.x = x0;
  switch (config.kind) {
    case KernelKind::rwm: {
      double lp = config.target.log_density(x0);
      s.log_pa_x = lp;
      s.log_phat_x = lp;
      break;
    }
    case KernelKind::da:
      s.log_pa_x = config.surrogate.log_approx(x0);
      s.log_phat_x = config.target.log_density(x0);
      break;
    case KernelKind::pm:
      s.log_pa_x = std::numeric_limits<double>::quiet_NaN();
      s.log_phat_x = config.estimator.estimate_log(x0, rng);
      break;
    case KernelKind::dapm:
      s.log_pa_x = config.surrogate.log_approx(x0);
      s.log_phat_x = config.estimator.estimate_log(x0, rng);
      break;
  }
  return s;
}

StepRecord do_step(ChainState& state, const KernelConfig& c, SplitRng& rng) {
  switch (c.kind) {
    case KernelKind::rwm:
      return rwm_step(state, c.target, c.proposal, rng);
    case KernelKind::da:
      return da_step(state, c.target, c.surrogate, c.proposal, rng);
    case KernelKind::pm:
      return pm_step(state, c.estimator, c.proposal, rng);
    case KernelKind::dapm:
      return dapm_step(state, c.surrogate, c.estimator, c.proposal, rng);
  }
  return {};
}

}  // namespace

ChainTrace run_chain(const KernelConfig& config, const RunOptions& opts) {
  if (opts.n_iter < 1) throw DomainError("run_chain: n_iter must be >= 1");
  if (opts.thin < 1) throw DomainError("run_chain: thin must be >= 1");
  const int d = config.target.dim > 0 ? config.target.dim : config.proposal.dim();
  Eigen::VectorXd x0 = opts.init.size() > 0 ? opts.init : Eigen::VectorXd::Zero(d);
  if (x0.size() != d) throw DomainError("run_chain: init has wrong dimension");

  SplitRng rng(opts.seed, opts.chain_id);
  ChainState state = make_initial_state(config, x0, rng);

  ChainTrace trace;
  trace.dim = d;
  const std::int64_t n_kept =
      opts.record_trace ? 1 + opts.n_iter / opts.thin : 0;
  if (opts.record_trace) {
    trace.samples.resize(n_kept, d);
    trace.iters.reserve(n_kept);
    trace.log_pa.reserve(n_kept);
    trace.log_phat.reserve(n_kept);
  }

  auto record = [&](std::int64_t iter, std::int64_t row) {
    trace.samples.row(row) = state.x.transpose();
    trace.iters.push_back(iter);
    trace.log_pa.push_back(state.log_pa_x);
    trace.log_phat.push_back(state.log_phat_x);
  };

  const auto t_start = std::chrono::steady_clock::now();
  for (std::int64_t k = 0; k < opts.burnin; ++k) do_step(state, config, rng);

  Counters& ct = trace.counters;
  std::int64_t row = 0;
  if (opts.record_trace) record(0, row++);
  for (std::int64_t k = 1; k <= opts.n_iter; ++k) {
    StepRecord rec = do_step(state, config, rng);
    ct.n_iter++;
    ct.stage1_attempts += rec.stage1_attempted;
    ct.stage1_accepts += rec.stage1_accepted;
    ct.stage2_attempts += rec.stage2_attempted;
    ct.stage2_accepts += rec.stage2_accepted;
    ct.expensive_evals += rec.expensive_evals;
    ct.sum_squared_jump += rec.squared_jump;
    switch (config.kind) {
      case KernelKind::rwm:
        ct.modeled_cost += 1.0;
        break;
      case KernelKind::pm:
        ct.modeled_cost += config.estimator.cost_per_eval;
        break;
      case KernelKind::da:
        ct.modeled_cost += config.surrogate.cost_eta + (rec.stage2_attempted ? 1.0 : 0.0);
        break;
      case KernelKind::dapm:
        ct.modeled_cost += config.surrogate.cost_eta +
                           (rec.stage2_attempted ? config.estimator.cost_per_eval : 0.0);
        break;
    }
    if (opts.record_trace && k % opts.thin == 0) record(k, row++);
  }
  ct.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace damh
