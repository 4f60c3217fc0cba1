#pragma once

#include <Eigen/Dense>
#include <vector>

#include "damh/rng.hpp"

namespace damh::lgss {

/// Linear-Gaussian state space model with a known initial state:
/// x_t = A x_{t-1} + b + N(0, Q), y_t = H x_t + N(0, R), t = 1..T.
struct Model {
  Eigen::MatrixXd A, Q, H, R;
  Eigen::VectorXd b;
  Eigen::VectorXd x0;
};

/// Exact log-likelihood of y_{1..T} by the Kalman filter.
double kalman_loglik(const Model& model, const std::vector<Eigen::VectorXd>& ys);

/// Simulate a y series from the model.
std::vector<Eigen::VectorXd> simulate(const Model& model, int T, SplitRng& rng);

/// Bootstrap particle filter on the same model (generic filter core), for
/// unbiasedness harnesses against the Kalman oracle.
double pf_loglik(const Model& model, const std::vector<Eigen::VectorXd>& ys, int m,
                 SplitRng& rng);

}  // namespace damh::lgss
