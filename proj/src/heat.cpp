#include "damh/heat.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "damh/errors.hpp"
#include "damh/kernels.hpp"
#include "damh/math.hpp"

namespace damh::heat {

HeatProblem make_default_problem(std::uint64_t seed, int n_obs) {
  HeatProblem p;
  p.kappa.resize(p.K);
  for (int k = 0; k < p.K; ++k) p.kappa[k] = 1.0 / (k + 1);
  p.obs_x.resize(n_obs);
  for (int i = 0; i < n_obs; ++i) p.obs_x[i] = double(i + 1) / double(n_obs + 1);

  SplitRng rng(seed);
  Eigen::VectorXd c_true(p.K);
  for (int k = 0; k < p.K; ++k)
    c_true[k] = std::sqrt(p.kappa[k]) * rng.normal(Stream::data);
  Eigen::VectorXd field = exact_forward(c_true, p.obs_x, p.tau);
  p.y.resize(n_obs);
  const double sd = std::sqrt(p.sigma2_noise);
  for (int i = 0; i < n_obs; ++i) p.y[i] = field[i] + sd * rng.normal(Stream::data);
  return p;
}

double exact_forward_at(const Eigen::VectorXd& c, double x, double tau) {
  double acc = 0.0;
  for (int k = 0; k < c.size(); ++k) {
    const double kpi = (k + 1) * M_PI;
    acc += c[k] * std::exp(-0.5 * kpi * kpi * tau) * std::sin(kpi * x);
  }
  return acc;
}

Eigen::VectorXd exact_forward(const Eigen::VectorXd& c, const Eigen::VectorXd& xs,
                              double tau) {
  Eigen::VectorXd out(xs.size());
  for (int i = 0; i < xs.size(); ++i) out[i] = exact_forward_at(c, xs[i], tau);
  return out;
}

void thomas_solve(Eigen::VectorXd& sub, Eigen::VectorXd& diag, Eigen::VectorXd& super,
                  Eigen::VectorXd& rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * super[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - super[i] * rhs[i + 1]) / diag[i];
}

Eigen::VectorXd fd_forward(const Eigen::VectorXd& c, const FDGrid& grid, double tau,
                           const Eigen::VectorXd& xs) {
  if (grid.n_x < 3 || grid.n_t < 1) throw DomainError("fd_forward: invalid grid");
  const int nx = grid.n_x;
  const double h = 1.0 / (nx + 1);
  const double dt = tau / grid.n_t;
  const double r = 0.5 * dt / (h * h);  // diffusion coefficient 1/2

  // initial condition: KL expansion sampled at interior nodes
  Eigen::VectorXd temp(nx);
  for (int j = 0; j < nx; ++j) {
    const double x = (j + 1) * h;
    double acc = 0.0;
    for (int k = 0; k < c.size(); ++k) acc += c[k] * std::sin((k + 1) * M_PI * x);
    temp[j] = acc;
  }

  // backward Euler: (I + r*(2,-1,-1 tridiagonal)) T^{m+1} = T^m
  for (int m = 0; m < grid.n_t; ++m) {
    Eigen::VectorXd sub = Eigen::VectorXd::Constant(nx, -r);
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(nx, 1.0 + 2.0 * r);
    Eigen::VectorXd super = Eigen::VectorXd::Constant(nx, -r);
    thomas_solve(sub, diag, super, temp);
  }

  // linear interpolation, Dirichlet zero at the boundaries
  Eigen::VectorXd out(xs.size());
  for (int i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double pos = x / h;  // node j sits at (j+1)*h
    const int left = static_cast<int>(std::floor(pos)) - 1;  // -1 => boundary
    const double frac = pos - std::floor(pos);
    const double tl = left < 0 ? 0.0 : (left >= nx ? 0.0 : temp[left]);
    const int right = left + 1;
    const double tr = right < 0 ? 0.0 : (right >= nx ? 0.0 : temp[right]);
    out[i] = tl + frac * (tr - tl);
  }
  return out;
}

double log_prior(const Eigen::VectorXd& c, const HeatProblem& p) {
  double acc = 0.0;
  for (int k = 0; k < p.K; ++k) acc += c[k] * c[k] / p.kappa[k];
  return -0.5 * acc;
}

double log_likelihood(const Eigen::VectorXd& c, const HeatProblem& p, Forward f,
                      const FDGrid& grid) {
  Eigen::VectorXd pred = f == Forward::exact ? exact_forward(c, p.obs_x, p.tau)
                                             : fd_forward(c, grid, p.tau, p.obs_x);
  return -0.5 * (p.y - pred).squaredNorm() / p.sigma2_noise;
}

double log_posterior(const Eigen::VectorXd& c, const HeatProblem& p, Forward f,
                     const FDGrid& grid) {
  return log_prior(c, p) + log_likelihood(c, p, f, grid);
}

PilotResult pilot_rwm(const HeatProblem& p, std::int64_t n_iter, std::uint64_t seed,
                      double target_accept) {
  TargetModel target;
  target.dim = p.K;
  target.log_density = [&p](const Eigen::VectorXd& c) {
    return log_posterior(c, p, Forward::exact);
  };

  Eigen::MatrixXd prior_cov = p.kappa.asDiagonal();
  double lambda = 0.1;
  SplitRng rng(seed);
  ChainState state;
  state.x = Eigen::VectorXd::Zero(p.K);
  state.log_pa_x = state.log_phat_x = target.log_density(state.x);

  // a few stochastic-approximation sweeps toward the target rate, then a
  // fixed-scale run whose final position lands in the posterior bulk
  const int n_phases = 8;
  const std::int64_t phase_len = std::max<std::int64_t>(200, n_iter / (2 * n_phases));
  double last_rate = 0.0;
  for (int phase = 0; phase < n_phases; ++phase) {
    ProposalSpec prop = ProposalSpec::covariance(lambda * lambda * prior_cov);
    std::int64_t acc = 0;
    for (std::int64_t k = 0; k < phase_len; ++k)
      acc += rwm_step(state, target, prop, rng).stage1_accepted;
    last_rate = double(acc) / double(phase_len);
    lambda *= std::exp(1.2 * (last_rate - target_accept));
  }
  ProposalSpec prop = ProposalSpec::covariance(lambda * lambda * prior_cov);
  std::int64_t acc = 0;
  const std::int64_t tail = std::max<std::int64_t>(1, n_iter / 2);
  for (std::int64_t k = 0; k < tail; ++k)
    acc += rwm_step(state, target, prop, rng).stage1_accepted;

  PilotResult res;
  res.c0 = state.x;
  res.lambda = lambda;
  res.accept_rate = double(acc) / double(tail);
  return res;
}

QsMoments qs_moments(const HeatProblem& p, const Eigen::VectorXd& c0, double lambda,
                     int n_samples, std::uint64_t seed, const FDGrid& grid,
                     Forward surrogate) {
  if (n_samples < 10) throw DomainError("qs_moments: need n_samples >= 10");
  SplitRng rng(seed);
  auto s_at = [&](const Eigen::VectorXd& c) {
    // priors cancel in s = log(pi_a / pi); only likelihood terms differ
    return log_likelihood(c, p, surrogate, grid) -
           log_likelihood(c, p, Forward::exact, grid);
  };
  const double lp0 = log_posterior(c0, p, Forward::exact, grid);
  const double s0 = s_at(c0);

  std::vector<double> qs(n_samples), ss(n_samples);
  Eigen::VectorXd sqrt_kappa = p.kappa.array().sqrt();
  for (int i = 0; i < n_samples; ++i) {
    Eigen::VectorXd c = c0;
    for (int k = 0; k < p.K; ++k)
      c[k] += lambda * sqrt_kappa[k] * rng.normal(Stream::proposal);
    qs[i] = log_posterior(c, p, Forward::exact, grid) - lp0;
    ss[i] = s_at(c) - s0;
  }

  auto mean = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    return m / v.size();
  };
  const double mq = mean(qs), ms = mean(ss);
  double vq = 0, vs = 0, cov = 0;
  for (int i = 0; i < n_samples; ++i) {
    vq += (qs[i] - mq) * (qs[i] - mq);
    vs += (ss[i] - ms) * (ss[i] - ms);
    cov += (qs[i] - mq) * (ss[i] - ms);
  }
  vq /= n_samples - 1;
  vs /= n_samples - 1;
  cov /= n_samples - 1;

  QsMoments out;
  out.n = n_samples;
  const double l2 = lambda * lambda;
  out.mean_s_over_l2 = ms / l2;
  out.var_s_over_l2 = vs / l2;
  out.s_degenerate = vs <= 1e-24 * std::max(1.0, vq);
  out.corr_qs = out.s_degenerate ? 0.0 : cov / std::sqrt(vq * vs);

  auto quantile_corr = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const int n = static_cast<int>(v.size());
    double mz = 0, mv = 0;
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) {
      z[i] = norm_ppf((i + 0.5) / n);
      mz += z[i];
      mv += v[i];
    }
    mz /= n;
    mv /= n;
    double num = 0, a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      num += (v[i] - mv) * (z[i] - mz);
      a += (v[i] - mv) * (v[i] - mv);
      b += (z[i] - mz) * (z[i] - mz);
    }
    return a > 0 ? num / std::sqrt(a * b) : 0.0;
  };
  out.qcorr_q = quantile_corr(qs);
  out.qcorr_s = out.s_degenerate ? 0.0 : quantile_corr(ss);
  return out;
}

}  // namespace damh::heat
