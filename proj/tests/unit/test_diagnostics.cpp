#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "damh/diagnostics.hpp"
#include "damh/rng.hpp"

using namespace damh;

TEST_CASE("ess of iid draws is close to n") {
  SplitRng rng(17);
  std::vector<double> x(100000);
  for (double& v : x) v = rng.normal(Stream::data);
  auto r = diag::ess_geyer(x);
  CHECK(r.ess / x.size() > 0.95);
  CHECK(r.ess / x.size() < 1.05);
  CHECK(r.iact >= 1.0);
}

TEST_CASE("ess of an AR(1) chain matches the analytic autocorrelation time") {
  SplitRng rng(99);
  const double rho = 0.5;
  auto x = oracles::ar1_series(rho, 1000000, rng);
  auto r = diag::ess_geyer(x);
  // IACT = (1 + rho) / (1 - rho) = 3
  CHECK(r.ess / x.size() == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("constant series is flagged with ess = n") {
  std::vector<double> x(500, 3.14);
  auto r = diag::ess_geyer(x);
  CHECK(r.degenerate);
  CHECK(r.ess == doctest::Approx(500.0));
  CHECK_THROWS_AS(diag::ess_geyer(std::vector<double>{1, 2, 3}), DomainError);
}

TEST_CASE("ess is invariant under affine transforms") {
  SplitRng rng(5);
  auto x = oracles::ar1_series(0.7, 50000, rng);
  auto r1 = diag::ess_geyer(x);
  for (double& v : x) v = -4.0 * v + 11.0;
  auto r2 = diag::ess_geyer(x);
  CHECK(r1.ess == doctest::Approx(r2.ess).epsilon(1e-12));
  CHECK(r1.truncation_lag == r2.truncation_lag);
}

TEST_CASE("harmonic mean ess never exceeds the arithmetic mean") {
  SplitRng rng(2);
  Eigen::MatrixXd m(20000, 3);
  for (int j = 0; j < 3; ++j) {
    auto x = oracles::ar1_series(0.2 + 0.3 * j, 20000, rng);
    for (int i = 0; i < 20000; ++i) m(i, j) = x[i];
  }
  auto per = diag::ess_per_coordinate(m);
  double harm = diag::ess_harmonic_mean(per);
  double arith = 0.0;
  for (const auto& r : per) arith += r.ess / per.size();
  CHECK(harm <= arith + 1e-9);
  CHECK(diag::ess_min(per) <= harm + 1e-9);
}

TEST_CASE("acceptance summary and relative efficiency plumbing") {
  Counters c;
  c.n_iter = 100;
  c.stage1_attempts = 100;
  c.stage1_accepts = 20;
  c.stage2_attempts = 20;
  c.stage2_accepts = 10;
  auto s = diag::acceptance_summary(c);
  CHECK(s.alpha1 == doctest::Approx(0.2));
  CHECK(s.alpha2given1 == doctest::Approx(0.5));
  CHECK(s.alpha12 == doctest::Approx(0.1));

  CHECK(diag::relative_efficiency(50, 2, 50, 2) == doctest::Approx(1.0));
  CHECK(diag::relative_efficiency(100, 2, 50, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(diag::relative_efficiency(1, 0, 1, 1), DomainError);
}

TEST_CASE("esjd equals the counter mean exactly; rejected chain gives zero") {
  Counters c;
  c.n_iter = 4;
  c.sum_squared_jump = 2.0;
  ChainTrace t;
  t.counters = c;
  CHECK(diag::esjd(t) == doctest::Approx(0.5));
  Counters zero;
  zero.n_iter = 10;
  ChainTrace tz;
  tz.counters = zero;
  CHECK(diag::esjd(tz) == 0.0);
}
