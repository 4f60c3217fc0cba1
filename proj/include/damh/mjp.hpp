#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "damh/kernels.hpp"
#include "damh/rng.hpp"

namespace damh::mjp {

/// A reaction network for exact stochastic simulation: integer state,
/// stoichiometry columns per reaction, and state-dependent rates.
struct StochasticNetwork {
  Eigen::MatrixXi stoich;  // n_species x n_reactions
  std::function<Eigen::VectorXd(const Eigen::VectorXi&)> rates;
};

struct GillespieResult {
  Eigen::VectorXi state;
  bool overflow = false;      // population exceeded the guard, rates unreliable
  std::int64_t n_events = 0;
};

/// Exact simulation over [0, t_span]: exponential waiting times with the
/// total rate, reaction picked proportionally to its rate. Absorbing when all
/// rates vanish.
GillespieResult gillespie_simulate(const StochasticNetwork& net,
                                   const Eigen::VectorXi& u0, double t_span,
                                   SplitRng& rng, Stream stream = Stream::estimator);

// ---------------------------------------------------------------------------
// Lotka-Volterra predator-prey model

/// Parameter vector x = (log c1, log c2, log c3, log s1, log s2) with
/// independent Uniform[-8, 8] priors.
struct LVParams {
  Eigen::Matrix<double, 5, 1> x;

  double c1() const { return std::exp(x[0]); }
  double c2() const { return std::exp(x[1]); }
  double c3() const { return std::exp(x[2]); }
  double s1() const { return std::exp(x[3]); }
  double s2() const { return std::exp(x[4]); }
  bool in_prior_support() const;
  static double log_prior(const Eigen::VectorXd& x);  // 0 inside, -inf outside
};

struct LVState {
  long long u1 = 0;  // prey
  long long u2 = 0;  // predator
};

/// Prey birth, predation, predator death with rates (c1 u1, c2 u1 u2, c3 u2).
StochasticNetwork lv_network(const LVParams& params);

struct ObservationSeries {
  std::vector<Eigen::Vector2d> y;  // y[0] observed at the (known) initial state
  LVState u0;
  int n() const { return static_cast<int>(y.size()); }
};

/// Allocation-free L-V path advance used in the particle filter's hot loop;
/// draws the same stream sequence as gillespie_simulate on lv_network.
/// Returns false on population overflow.
bool lv_advance(const LVParams& params, LVState& state, double t_span, SplitRng& rng,
                Stream stream = Stream::estimator);

/// Latent path by Gillespie, observations with N(u, diag(s1^2, s2^2)) noise
/// every time unit; the first observation is taken at the initial state.
ObservationSeries simulate_dataset(const LVParams& params, const LVState& u0, int n,
                                   std::uint64_t seed);

void save_dataset(const std::string& path, const ObservationSeries& series,
                  const LVParams& params, std::uint64_t seed);
ObservationSeries load_dataset(const std::string& path);

// ---------------------------------------------------------------------------
// Bootstrap particle filter

/// Systematic resampling: one uniform on [0,1) places m equally spaced points
/// against the cumulative weights. E[copies of i] = m * w_i exactly.
std::vector<int> systematic_resample(const std::vector<double>& weights, int m,
                                     double u);

/// Generic bootstrap filter in log space: propagate, weight, resample at each
/// observation. Returns -inf when all weights vanish at some step.
template <class State>
double bootstrap_pf_core(std::vector<State>& particles,
                         const std::function<void(State&, SplitRng&)>& propagate,
                         const std::function<double(const State&, int t)>& log_weight,
                         int t_begin, int t_end, SplitRng& rng);

/// Log-likelihood estimate for the Lotka-Volterra observation series (up to
/// the prior). Unbiased on the natural scale.
double bootstrap_pf_loglik(const LVParams& params, const ObservationSeries& series,
                           int m, SplitRng& rng);

// ---------------------------------------------------------------------------
// Linear noise approximation

/// Reaction system in continuous form for the LNA ODEs: dz = S h(z),
/// dV = V F^T + S diag(h) S^T + F V with F the rate Jacobian at z.
struct LNASystem {
  Eigen::MatrixXd stoich;  // n_species x n_reactions
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> rates;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

LNASystem lv_lna_system(const LVParams& params);

struct LNAState {
  Eigen::VectorXd z;
  Eigen::MatrixXd V;
};

/// Classical RK4 with fixed step; V is symmetrized after every step. Throws
/// NumericError if the mean path blows up.
LNAState lna_integrate(const LNASystem& sys, LNAState state, double t_span,
                       double dt = 0.01);

/// Marginal likelihood of the observation series under the LNA with the
/// restart convention: each interval starts from the filtered mean with
/// V = C_t (so the m-ODE stays at zero), forecast through the observation
/// density, then a standard Gaussian measurement update. y[0] is observed at
/// the known initial state u0.
double lna_marginal_loglik_generic(const LNASystem& sys, const Eigen::VectorXd& u0,
                                   const std::vector<Eigen::VectorXd>& ys,
                                   const Eigen::MatrixXd& obs_cov, double dt = 0.01);

double lna_marginal_loglik(const LVParams& params, const ObservationSeries& series,
                           double dt = 0.01);

// ---------------------------------------------------------------------------

/// Sample variance of repeated log-likelihood estimates at each parameter
/// point (the sigma2 the tuning strategy targets).
std::vector<double> estimate_sigma2(
    const std::vector<Eigen::VectorXd>& points,
    const std::function<double(const Eigen::VectorXd&, SplitRng&)>& loglik_draw,
    int n_reps, std::uint64_t seed);

/// Posterior models for MCMC over the LV parameters: the surrogate is
/// prior x LNA marginal likelihood (-inf outside the prior box, so Stage One
/// rejects without touching the particle filter); the estimator is
/// prior x bootstrap filter estimate.
std::function<double(const Eigen::VectorXd&)> lv_surrogate_logpost(
    const ObservationSeries& series, double dt = 0.01);
std::function<double(const Eigen::VectorXd&, SplitRng&)> lv_pf_logpost(
    const ObservationSeries& series, int m);

struct LVPilot {
  Eigen::VectorXd median;       // component-wise posterior median
  Eigen::MatrixXd cov;          // sample covariance of the pilot chain
  std::vector<Eigen::VectorXd> extra_points;  // spread posterior draws
  double accept_rate = 0.0;
};

/// Preliminary run on the (cheap) LNA surrogate posterior: adapts a diagonal
/// scale toward ~25% acceptance, then a fixed-scale stretch whose thinned
/// samples give the median, covariance and representative points.
LVPilot lv_pilot(const ObservationSeries& series, std::int64_t n_iter,
                 std::uint64_t seed, const Eigen::VectorXd& start);

/// gamma^2 (2.56^2 / 5) * cov, the study's proposal covariance.
Eigen::MatrixXd lv_proposal_cov(const Eigen::MatrixXd& cov, double gamma);

struct LVRunResult {
  Counters counters;
  double min_ess = 0.0;
  double wall_seconds = 0.0;
  double mess_per_second = 0.0;
};

/// One DAPsMRWM / PMRWM run over the LV posterior (kind rwm is not
/// meaningful here; pm and dapm are the study variants). The modeled cost
/// counts modeled_surrogate_cost per iteration plus m per estimator call.
LVRunResult lv_run(KernelKind kind, const ObservationSeries& series, int m,
                   const Eigen::MatrixXd& proposal_cov, const Eigen::VectorXd& init,
                   std::int64_t n_iter, std::int64_t burnin, std::uint64_t seed,
                   std::uint64_t chain_id = 0, int thin = 1,
                   double modeled_surrogate_cost = 0.0);

}  // namespace damh::mjp
