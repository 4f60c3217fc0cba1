#include <doctest.h>

#include <cmath>

#include "damh/product_study.hpp"
#include "damh/rng.hpp"

using namespace damh;
using namespace damh::product;

TEST_CASE("betas: zero error, gaussian family closed form, clamping") {
  SurrogateError1D zero;
  zero.s = [](double) { return 0.0; };
  auto r = betas_by_quadrature(zero, {}, 1.0);
  CHECK(r.q.beta1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.q.beta2 == doctest::Approx(0.0).epsilon(1e-9));

  // N(a, 1/b) against N(0,1): beta1 = 1 - b, beta2^2 = (1-b)^2 + a^2 b^2
  SplitRng rng(61);
  for (int i = 0; i < 50; ++i) {
    double a = 2.0 * (rng.uniform(Stream::data) - 0.5);
    double b = 0.3 + 2.0 * rng.uniform(Stream::data);
    auto g = betas_by_quadrature(gaussian_approx_error(a, b), {}, 1.0);
    double b1 = 1.0 - b;
    double b2 = std::sqrt(b1 * b1 + a * a * b * b);
    CHECK(g.q.beta1 == doctest::Approx(b1).epsilon(1e-6));
    CHECK(g.q.beta2 == doctest::Approx(b2).epsilon(1e-6));
  }

  // (a=0, b=2): exactly (-1, 1), the boundary |beta1| = beta2 gets clamped
  // consistently whichever side round-off lands on
  auto edge = betas_by_quadrature(gaussian_approx_error(0.0, 2.0), {}, 1.0);
  CHECK(edge.q.beta1 == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(edge.q.beta2 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(edge.q.beta1) <= edge.q.beta2);
}

TEST_CASE("betas: finite-difference fallback matches analytic derivatives") {
  auto full = logistic_error({0.5, 1.7});
  SurrogateError1D s_only;
  s_only.s = full.s;
  auto ra = betas_by_quadrature(full, {}, 1.0);
  auto rf = betas_by_quadrature(s_only, {}, 1.0);
  CHECK(rf.q.beta1 == doctest::Approx(ra.q.beta1).epsilon(1e-5));
  CHECK(rf.q.beta2 == doctest::Approx(ra.q.beta2).epsilon(1e-5));
}

TEST_CASE("betas reproduce the eight study pairs") {
  struct Row { double phi1, phi2, b1, b2; };
  const Row rows[] = {
      {0.0, 0.6, 0.834, 0.834}, {0.0, 1.2, 0.441, 0.449},
      {0.0, 1.8, -0.042, 0.262}, {0.0, 2.3, -0.467, 0.649},
      {0.0, 2.7, -0.810, 1.025}, {1.0, 1.2, 0.535, 0.762},
      {0.6, 1.8, 0.056, 0.681},  {0.5, 2.3, -0.351, 0.941},
  };
  for (const auto& r : rows) {
    auto b = betas_by_quadrature(logistic_error({r.phi1, r.phi2}), {}, 1.0);
    CHECK(std::abs(b.q.beta1 - r.b1) < 0.005);
    CHECK(std::abs(b.q.beta2 - r.b2) < 0.005);
  }
}

TEST_CASE("synthetic estimator: exactness at zero noise, stated moments") {
  TargetModel target = product_normal_target(2);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(2, 0.4);

  LikelihoodEstimator exact = synthetic_estimator(target, 0.0);
  SplitRng rng(3);
  CHECK(exact.estimate_log(x, rng) == target.log_density(x));

  LikelihoodEstimator noisy = synthetic_estimator(target, 1.0);
  const int n = 1000000;
  double sw = 0.0, sw2 = 0.0, sexp = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = noisy.estimate_log(x, rng) - target.log_density(x);
    sw += w;
    sw2 += w * w;
    sexp += std::exp(w);
  }
  double mean = sw / n;
  double var = sw2 / n - mean * mean;
  CHECK(mean == doctest::Approx(-0.5).epsilon(0.006));
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
  // unbiasedness on the natural scale: se of exp(W) with var e-1
  CHECK(sexp / n == doctest::Approx(1.0).epsilon(3.0 * 1.31 / std::sqrt(double(n))));

  LikelihoodEstimator wide = synthetic_estimator(target, 4.0);
  double s2w = 0.0, s2m = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = wide.estimate_log(x, rng) - target.log_density(x);
    s2m += w;
    s2w += w * w;
  }
  s2m /= n;
  CHECK(s2w / n - s2m * s2m == doctest::Approx(4.0).epsilon(0.02));
  CHECK(wide.cost_per_eval == doctest::Approx(0.25));
}

TEST_CASE("spearman rank correlation") {
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) ==
        doctest::Approx(1.0));
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) ==
        doctest::Approx(-1.0));
}

TEST_CASE("short study run wires rates, ess ratios and predictions together") {
  StudyConfig cfg;
  cfg.phis = {{0.0, 1.8}};
  cfg.scalings = {1.0};
  cfg.sigma2s = {2.0};
  cfg.n_iter = 60000;
  cfg.seed = 314;
  cfg.jobs = 2;
  StudyResult res = run_logistic_study(cfg);
  REQUIRE(res.rows.size() == 2);  // one DA row, one DAPM row

  for (const auto& row : res.rows) {
    CHECK(row.beta1 == doctest::Approx(-0.042).epsilon(0.15));
    CHECK(row.alpha1_hat > 0.0);
    CHECK(row.alpha1_hat < 1.0);
    CHECK(row.ess_xx.size() == 3);
    // eta = 0 beats eta = 0.01 under the same run: modeled costs only shrink
    CHECK(row.ess_xx[2] >= row.ess_xx[0]);
    // at scaling lambda*, the finite-d gap in alpha1 is small
    CHECK(std::abs(row.alpha1_hat - row.pred_alpha1) < 0.035);
  }
  // the exact-surrogate degeneracy: DA at lambda* with s == 0 would have
  // ESS* = 1; the logistic surrogate at (0, 1.8) stays below that
  CHECK(res.rows[0].ess_star < 1.1);
  CHECK(res.rwm_alpha1 == doctest::Approx(0.26).epsilon(0.1));
  CHECK(res.pm_alpha1 == doctest::Approx(0.115).epsilon(0.2));
}

TEST_CASE("exact surrogate study row degenerates to the baseline") {
  // s == 0 via phi -> the target itself is not in the logistic family, so
  // instead check the invariant through the kernel layer: a DA chain with the
  // exact surrogate reproduces RWM, hence ESS* = 1 exactly on the same seed
  const int d = 10;
  TargetModel target = product_normal_target(d);
  SurrogateModel sur;
  sur.log_approx = target.log_density;
  const double lambda = 2.38 / std::sqrt(double(d));
  RunOptions opts;
  opts.n_iter = 50000;
  opts.seed = 1;
  KernelConfig da{KernelKind::da, target, sur, {}, ProposalSpec::isotropic(lambda, d)};
  KernelConfig rwm{KernelKind::rwm, target, {}, {}, ProposalSpec::isotropic(lambda, d)};
  ChainTrace tda = run_chain(da, opts);
  ChainTrace trwm = run_chain(rwm, opts);
  CHECK((tda.samples - trwm.samples).cwiseAbs().maxCoeff() == 0.0);
}
