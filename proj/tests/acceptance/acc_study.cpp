#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "damh/product_study.hpp"
#include "damh/theory.hpp"

using namespace damh;
using namespace damh::product;

TEST_CASE("criterion 05_simulation_vs_theory: scaled study reproduces the reference rates") {
  // RWM baseline sanity at full length: alpha = 0.2616 in d=10
  {
    KernelConfig kc;
    kc.kind = KernelKind::rwm;
    kc.target = product_normal_target(10);
    kc.proposal = ProposalSpec::isotropic(2.38 / std::sqrt(10.0), 10);
    RunOptions opts;
    opts.n_iter = 10000000;
    opts.seed = 90210;
    opts.record_trace = false;
    ChainTrace t = run_chain(kc, opts);
    CHECK(std::abs(t.counters.alpha1_hat() - 0.2616) <= 0.003);
  }

  StudyConfig cfg;
  cfg.phis = {{0, 0.6}, {0, 1.2}, {0, 1.8}, {0, 2.3},
              {0, 2.7}, {1.0, 1.2}, {0.6, 1.8}, {0.5, 2.3}};
  cfg.scalings = {2.0};
  cfg.sigma2s = {2.0};
  cfg.n_iter = 1000000;
  cfg.seed = 112;
  cfg.jobs = 2;
  StudyResult res = run_logistic_study(cfg);
  REQUIRE(res.rows.size() == 16);

  const StudyRow* da18 = nullptr;
  const StudyRow* dapm18 = nullptr;
  for (const auto& r : res.rows) {
    if (r.phi1 == 0.0 && r.phi2 == 1.8) {
      if (r.kind == KernelKind::da) da18 = &r;
      if (r.kind == KernelKind::dapm) dapm18 = &r;
    }
  }
  REQUIRE(da18 != nullptr);
  REQUIRE(dapm18 != nullptr);

  // reference empirical rates at scaling 2 lambda*, sigma2* = 2
  CHECK(std::abs(dapm18->alpha1_hat - 0.0311) <= 0.006);
  CHECK(std::abs(dapm18->alpha2given1_hat - 0.286) <= 0.04);
  CHECK(std::abs(da18->alpha1_hat - 0.041) <= 0.008);
  CHECK(std::abs(da18->alpha2given1_hat - 0.738) <= 0.06);

  // the theory orders the cells correctly: rank correlation above 0.8
  std::vector<double> pred, emp;
  for (const auto& r : res.rows) {
    pred.push_back(r.pred_rel_eff);
    emp.push_back(r.ess_xx.back());  // eta = 0 column
  }
  double rho = spearman_rank_correlation(pred, emp);
  std::printf("  [criterion 05] spearman(pred, emp) = %.3f over %zu cells\n", rho,
              pred.size());
  CHECK(rho > 0.8);

  // relative efficiencies land near the reference table: the DAPM (0, 0.6)
  // cell is not worthwhile (about 0.88) while DA (0, 1.8) pays off; the DA
  // ESS**0 column of the reference has internal inconsistencies for half its
  // rows, so the band here derives from the row's own ESS* / alpha1 (~5.2)
  for (const auto& r : res.rows) {
    if (r.kind == KernelKind::dapm && r.phi1 == 0.0 && r.phi2 == 0.6)
      CHECK(r.ess_xx.back() == doctest::Approx(0.88).epsilon(0.25));
    if (r.kind == KernelKind::da && r.phi1 == 0.0 && r.phi2 == 1.8) {
      CHECK(r.ess_xx.back() > 4.2);
      CHECK(r.ess_xx.back() < 8.9);
    }
  }

  // theory predicts stage rates well at the small scaling: rerun two cells at
  // lambda* and compare alpha1 against the limit
  StudyConfig small = cfg;
  small.phis = {{0, 1.8}, {0, 1.2}};
  small.scalings = {1.0};
  small.n_iter = 400000;
  small.seed = 113;
  StudyResult res_small = run_logistic_study(small);
  for (const auto& r : res_small.rows)
    CHECK(std::abs(r.alpha1_hat - r.pred_alpha1) <= 0.03);
}
