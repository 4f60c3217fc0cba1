#include <doctest.h>

#include <cmath>

#include "damh/heat.hpp"

using namespace damh;
using namespace damh::heat;

TEST_CASE("exact forward map: zeros, single mode, superposition") {
  HeatProblem p = make_default_problem();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.K);
  for (double x : {0.1, 0.5, 0.9})
    CHECK(exact_forward_at(zero, x, p.tau) == 0.0);

  // first mode at x = 1/2: amplitude exp(-pi^2 tau / 2)
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p.K);
  e1[0] = 1.0;
  CHECK(exact_forward_at(e1, 0.5, p.tau) ==
        doctest::Approx(std::exp(-0.5 * M_PI * M_PI * p.tau)).epsilon(1e-14));
  CHECK(exact_forward_at(e1, 0.0, p.tau) == doctest::Approx(0.0));
  CHECK(exact_forward_at(e1, 1.0, p.tau) == doctest::Approx(0.0).scale(1.0));

  // linearity
  SplitRng rng(40);
  Eigen::VectorXd a(p.K), b(p.K);
  for (int k = 0; k < p.K; ++k) {
    a[k] = rng.normal(Stream::data);
    b[k] = rng.normal(Stream::data);
  }
  Eigen::VectorXd xs(3);
  xs << 0.21, 0.5, 0.77;
  Eigen::VectorXd fa = exact_forward(a, xs, p.tau);
  Eigen::VectorXd fb = exact_forward(b, xs, p.tau);
  Eigen::VectorXd fab = exact_forward(a + b, xs, p.tau);
  CHECK((fab - fa - fb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-mode amplitude decays in time") {
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(5);
  e2[1] = 1.0;
  double prev = 1.0;
  for (double tau : {0.001, 0.005, 0.02, 0.1}) {
    double amp = std::abs(exact_forward_at(e2, 0.25, tau));
    CHECK(amp < prev);
    prev = amp;
  }
}

TEST_CASE("fd forward: zeros, linearity, refinement convergence") {
  HeatProblem p = make_default_problem();
  FDGrid grid;
  Eigen::VectorXd xs = p.obs_x;

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.K);
  CHECK(fd_forward(zero, grid, p.tau, xs).cwiseAbs().maxCoeff() == 0.0);

  SplitRng rng(41);
  Eigen::VectorXd c(p.K);
  for (int k = 0; k < p.K; ++k)
    c[k] = std::sqrt(p.kappa[k]) * rng.normal(Stream::data);

  // surrogate error is nonzero on the coarse default grid
  Eigen::VectorXd coarse = fd_forward(c, grid, p.tau, xs);
  Eigen::VectorXd exact = exact_forward(c, xs, p.tau);
  CHECK((coarse - exact).cwiseAbs().maxCoeff() > 1e-6);

  // error shrinks monotonically as both grids double
  double prev_err = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 4; ++s) {
    FDGrid g{grid.n_x << s, grid.n_t << s};
    double err = (fd_forward(c, g, p.tau, xs) - exact).cwiseAbs().maxCoeff();
    CHECK(err < prev_err);
    prev_err = err;
  }

  // refined grid reproduces the spectral solution
  FDGrid fine{800, 800};
  Eigen::VectorXd ref = fd_forward(c, fine, p.tau, xs);
  double rel = (ref - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
  CHECK(rel < 1e-3);

  // linear in c
  Eigen::VectorXd c2 = 2.0 * c;
  CHECK((fd_forward(c2, grid, p.tau, xs) - 2.0 * coarse).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(fd_forward(c, FDGrid{2, 1}, p.tau, xs), DomainError);
}

TEST_CASE("log posterior: prior-only at zero data, determinism, gradient oracle") {
  HeatProblem p = make_default_problem();
  p.y.setZero();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.K);
  CHECK(log_posterior(zero, p, Forward::exact) == doctest::Approx(0.0));

  HeatProblem q = make_default_problem();
  SplitRng rng(42);
  Eigen::VectorXd c(q.K);
  for (int k = 0; k < q.K; ++k) c[k] = 0.3 * rng.normal(Stream::data);

  // deterministic solvers: repeated evaluation is bit-identical
  CHECK(log_posterior(c, q, Forward::fd) == log_posterior(c, q, Forward::fd));
  double s = log_posterior(c, q, Forward::fd) - log_posterior(c, q, Forward::exact);
  CHECK(s == log_posterior(c, q, Forward::fd) - log_posterior(c, q, Forward::exact));

  // the exact posterior is quadratic, so probing with unit vectors yields an
  // exact gradient oracle: grad_k = (f(c + h e_k) - f(c - h e_k)) / 2h is
  // exact for quadratics at any h; compare across two very different h
  for (int k : {0, 3, 17, 39}) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(q.K);
    e[k] = 1.0;
    auto grad_at = [&](double h) {
      return (log_posterior(c + h * e, q, Forward::exact) -
              log_posterior(c - h * e, q, Forward::exact)) /
             (2.0 * h);
    };
    double g1 = grad_at(1e-1);
    double g2 = grad_at(1e-3);
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-6));
  }
}

TEST_CASE("qs moments: lambda scaling limit and the degenerate surrogate flag") {
  HeatProblem p = make_default_problem();
  PilotResult pilot = pilot_rwm(p, 20000, 7);
  CHECK(pilot.accept_rate > 0.15);
  CHECK(pilot.accept_rate < 0.35);

  QsMoments a = qs_moments(p, pilot.c0, 0.01, 30000, 21);
  QsMoments b = qs_moments(p, pilot.c0, 0.02, 30000, 21);
  CHECK(a.mean_s_over_l2 == doctest::Approx(b.mean_s_over_l2).epsilon(0.10));
  CHECK(a.var_s_over_l2 == doctest::Approx(b.var_s_over_l2).epsilon(0.10));

  // replacing the surrogate by the exact map makes S identically zero
  QsMoments d = qs_moments(p, pilot.c0, 0.05, 1000, 3, {}, Forward::exact);
  CHECK(d.s_degenerate);
}

TEST_CASE("corr(Q,S) is stable across the lambda grid") {
  HeatProblem p = make_default_problem();
  PilotResult pilot = pilot_rwm(p, 20000, 70);
  QsMoments m1 = qs_moments(p, pilot.c0, 0.05, 30000, 5);
  QsMoments m2 = qs_moments(p, pilot.c0, 0.1, 30000, 5);
  QsMoments m3 = qs_moments(p, pilot.c0, 0.2, 30000, 5);
  CHECK(std::abs(m1.corr_qs - m2.corr_qs) < 0.05);
  CHECK(std::abs(m2.corr_qs - m3.corr_qs) < 0.05);
  CHECK(std::abs(m1.corr_qs - m3.corr_qs) < 0.05);
}
