#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "damh/rng.hpp"

namespace damh::heat {

/// Backward-Euler grid for the surrogate solver: n_x interior spatial nodes,
/// n_t time steps.
struct FDGrid {
  int n_x = 50;
  int n_t = 10;
};

/// Recover the initial temperature field of the 1-D heat equation
/// dT/dt = (1/2) d2T/dx2, T(0,t) = T(1,t) = 0, from noisy point observations
/// at time tau. The field is parameterized by K Karhunen-Loeve coefficients
/// with prior c_k ~ N(0, kappa_k), kappa_k = 1/k.
struct HeatProblem {
  int K = 40;
  double tau = 0.01;
  double sigma2_noise = 2.0;
  Eigen::VectorXd kappa;   // prior variances, length K
  Eigen::VectorXd obs_x;   // observation locations in (0,1)
  Eigen::VectorXd y;       // observations
};

/// Synthetic dataset: initial field drawn from the prior, observed at N
/// equidistant interior points. Fully determined by the seed.
HeatProblem make_default_problem(std::uint64_t seed = 4012, int n_obs = 30);

/// Spectral solution F(c)(x) = sum_k c_k exp(-(k pi)^2 tau / 2) sin(k pi x).
double exact_forward_at(const Eigen::VectorXd& c, double x, double tau);
Eigen::VectorXd exact_forward(const Eigen::VectorXd& c, const Eigen::VectorXd& xs,
                              double tau);

/// Fully implicit finite differences on the coarse grid; each time step
/// solves one tridiagonal system (Thomas algorithm). Observations are linear
/// interpolation between grid nodes.
Eigen::VectorXd fd_forward(const Eigen::VectorXd& c, const FDGrid& grid, double tau,
                           const Eigen::VectorXd& xs);

/// In-place Thomas solve of a tridiagonal system (sub, diag, super, rhs).
void thomas_solve(Eigen::VectorXd& sub, Eigen::VectorXd& diag, Eigen::VectorXd& super,
                  Eigen::VectorXd& rhs);

enum class Forward { exact, fd };

double log_prior(const Eigen::VectorXd& c, const HeatProblem& p);
double log_likelihood(const Eigen::VectorXd& c, const HeatProblem& p, Forward f,
                      const FDGrid& grid = {});
double log_posterior(const Eigen::VectorXd& c, const HeatProblem& p, Forward f,
                     const FDGrid& grid = {});

struct PilotResult {
  Eigen::VectorXd c0;      // final chain position (bulk of the posterior)
  double lambda = 0.0;     // scale reaching roughly the target acceptance
  double accept_rate = 0.0;
};

/// Exact-posterior RWM in coefficient space with proposal covariance
/// proportional to the prior; the scale is adjusted in stages toward the
/// target acceptance rate, then held fixed.
PilotResult pilot_rwm(const HeatProblem& p, std::int64_t n_iter, std::uint64_t seed,
                      double target_accept = 0.25);

struct QsMoments {
  double mean_s_over_l2 = 0.0;
  double var_s_over_l2 = 0.0;
  double corr_qs = 0.0;
  double qcorr_q = 0.0;  // Gaussian quantile correlation of the Q sample
  double qcorr_s = 0.0;
  bool s_degenerate = false;
  int n = 0;
};

/// Draw n proposals c* = c0 + lambda * sqrt(kappa) .* z, compute
/// Q = Delta log pi (exact) and S = Delta s (surrogate error difference),
/// and return the lambda-scaled moments plus normality diagnostics.
QsMoments qs_moments(const HeatProblem& p, const Eigen::VectorXd& c0, double lambda,
                     int n_samples, std::uint64_t seed, const FDGrid& grid = {},
                     Forward surrogate = Forward::fd);

}  // namespace damh::heat
