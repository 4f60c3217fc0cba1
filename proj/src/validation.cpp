#include "damh/validation.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "damh/lgss.hpp"
#include "damh/math.hpp"
#include "damh/mjp.hpp"
#include "damh/rng.hpp"

namespace damh::validation {

namespace {

UnbiasednessCheck summarize(const std::vector<double>& ratios) {
  UnbiasednessCheck c;
  c.n_reps = static_cast<int>(ratios.size());
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= c.n_reps;
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= (c.n_reps - 1);
  c.mean_ratio = mean;
  c.std_error = std::sqrt(var / c.n_reps);
  c.pass = std::abs(mean - 1.0) <= 3.0 * c.std_error;
  return c;
}

}  // namespace

UnbiasednessCheck pf_check_hmm(int n_reps, std::uint64_t seed) {
  // two states, two steps, known start in state 0
  const double P[2][2] = {{0.7, 0.3}, {0.4, 0.6}};
  const double emit[2][2] = {{0.8, 0.2}, {0.3, 0.7}};  // emit[state][y]
  const int obs[2] = {1, 0};

  // exact forward sum over the two hidden steps
  double exact = 0.0;
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      exact += P[0][x1] * emit[x1][obs[0]] * P[x1][x2] * emit[x2][obs[1]];
  const double exact_log = std::log(exact);

  std::function<void(int&, SplitRng&)> propagate = [&](int& x, SplitRng& rng) {
    x = rng.uniform(Stream::estimator) < P[x][0] ? 0 : 1;
  };
  std::function<double(const int&, int)> log_weight = [&](const int& x, int t) {
    return std::log(emit[x][obs[t]]);
  };

  std::vector<double> ratios(n_reps);
  for (int r = 0; r < n_reps; ++r) {
    SplitRng rng(seed, r + 1);
    std::vector<int> particles(1, 0);  // a single particle is still unbiased
    double est = mjp::bootstrap_pf_core<int>(particles, propagate, log_weight, 0, 2, rng);
    ratios[r] = std::exp(est - exact_log);
  }
  return summarize(ratios);
}

UnbiasednessCheck pf_check_lgss(int n_reps, std::uint64_t seed, int n_particles) {
  lgss::Model m;
  m.A = Eigen::MatrixXd::Constant(1, 1, 0.9);
  m.Q = Eigen::MatrixXd::Constant(1, 1, 0.3);
  m.H = Eigen::MatrixXd::Constant(1, 1, 1.0);
  m.R = Eigen::MatrixXd::Constant(1, 1, 0.4);
  m.b = Eigen::VectorXd::Constant(1, 0.5);
  m.x0 = Eigen::VectorXd::Constant(1, 1.0);

  SplitRng data_rng(seed);
  std::vector<Eigen::VectorXd> ys = lgss::simulate(m, 10, data_rng);
  const double exact_log = lgss::kalman_loglik(m, ys);

  std::vector<double> ratios(n_reps);
  for (int r = 0; r < n_reps; ++r) {
    SplitRng rng(seed, r + 1);
    double est = lgss::pf_loglik(m, ys, n_particles, rng);
    ratios[r] = std::exp(est - exact_log);
  }
  return summarize(ratios);
}

LnaLinearCheck lna_check_linear() {
  // immigration-death: rates (c1, c2 z), stoichiometry (+1, -1); the LNA is a
  // linear-Gaussian model with closed-form transition moments
  const double c1 = 2.0, c2 = 0.25, s = 1.5;
  const double u0 = 10.0;
  const std::vector<double> ys_raw = {10.2, 11.5, 9.8, 10.9, 12.1, 11.0};

  mjp::LNASystem sys;
  sys.stoich = Eigen::MatrixXd(1, 2);
  sys.stoich << 1.0, -1.0;
  sys.rates = [c1, c2](const Eigen::VectorXd& z) {
    Eigen::VectorXd h(2);
    h << c1, c2 * z[0];
    return h;
  };
  sys.jacobian = [c2](const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, -c2);
  };

  std::vector<Eigen::VectorXd> ys;
  for (double y : ys_raw) ys.push_back(Eigen::VectorXd::Constant(1, y));
  Eigen::VectorXd z0 = Eigen::VectorXd::Constant(1, u0);
  Eigen::MatrixXd obs_cov = Eigen::MatrixXd::Constant(1, 1, s * s);
  const double lna = mjp::lna_marginal_loglik_generic(sys, z0, ys, obs_cov, 0.01);

  // independent Kalman recursion from the exact ODE solutions:
  //   mean: z(1) = c1/c2 + (a - c1/c2) e^{-c2}
  //   var from V(0)=0: c1 (1 - e^{-2 c2}) / c2 + (c2 a - c1) e^{-2 c2} (e^{c2} - 1) / c2
  const double A = std::exp(-c2);
  const double mean_eq = c1 / c2;
  auto trans_var = [&](double a) {
    return c1 * (1.0 - std::exp(-2.0 * c2)) / c2 +
           (c2 * a - c1) * std::exp(-2.0 * c2) * (std::exp(c2) - 1.0) / c2;
  };
  auto log_norm = [](double y, double mean, double var) {
    return -0.5 * (y - mean) * (y - mean) / var - 0.5 * std::log(var) - kLogSqrt2Pi;
  };
  double a = u0, C = 0.0;
  double kalman = log_norm(ys_raw[0], u0, s * s);
  for (std::size_t t = 0; t + 1 < ys_raw.size(); ++t) {
    const double z = mean_eq + (a - mean_eq) * A;
    const double V = A * A * C + trans_var(a);
    const double S = V + s * s;
    kalman += log_norm(ys_raw[t + 1], z, S);
    const double K = V / S;
    a = z + K * (ys_raw[t + 1] - z);
    C = V - K * V;
  }

  LnaLinearCheck res;
  res.max_abs_err = std::abs(lna - kalman);
  res.pass = res.max_abs_err <= 1e-6;
  return res;
}

LnaStepCheck lna_check_step_halving() {
  mjp::LVParams params;
  params.x << std::log(1.0), std::log(0.005), std::log(0.6), std::log(8.0),
      std::log(8.0);
  mjp::LVState u0{71, 79};
  mjp::ObservationSeries series = mjp::simulate_dataset(params, u0, 20, 777001);
  const double l1 = mjp::lna_marginal_loglik(params, series, 0.01);
  const double l2 = mjp::lna_marginal_loglik(params, series, 0.005);
  LnaStepCheck res;
  res.delta = std::abs(l1 - l2);
  res.pass = res.delta < 1e-8;
  return res;
}

}  // namespace damh::validation
