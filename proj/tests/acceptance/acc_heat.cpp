#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "damh/heat.hpp"

using namespace damh;
using namespace damh::heat;

TEST_CASE("criterion 10_heat_lemma_diagnostics: lambda-stable moments, Gaussian marginals") {
  HeatProblem p = make_default_problem();
  PilotResult pilot = pilot_rwm(p, 100000, 2026);
  std::printf("  [criterion 10] pilot acceptance %.3f at lambda %.4f\n",
              pilot.accept_rate, pilot.lambda);
  CHECK(pilot.accept_rate >= 0.18);
  CHECK(pilot.accept_rate <= 0.32);

  const double lambdas[] = {0.05, 0.1, 0.2};
  double mean_s[3], var_s[3], corr[3];
  for (int i = 0; i < 3; ++i) {
    QsMoments m = qs_moments(p, pilot.c0, lambdas[i], 60000, 31 + i);
    mean_s[i] = m.mean_s_over_l2;
    var_s[i] = m.var_s_over_l2;
    corr[i] = m.corr_qs;
    std::printf(
        "  [criterion 10] lambda %.2f: meanS/l2 %.5f varS/l2 %.6f corr %.4f "
        "qcorr(Q) %.5f qcorr(S) %.5f\n",
        lambdas[i], m.mean_s_over_l2, m.var_s_over_l2, m.corr_qs, m.qcorr_q,
        m.qcorr_s);
    CHECK(m.qcorr_q >= 0.995);
    CHECK(m.qcorr_s >= 0.995);
    CHECK_FALSE(m.s_degenerate);
  }
  auto spread = [](const double* v) {
    double lo = std::min({v[0], v[1], v[2]});
    double hi = std::max({v[0], v[1], v[2]});
    return (hi - lo) / std::abs(hi);
  };
  CHECK(spread(mean_s) < 0.15);
  CHECK(spread(var_s) < 0.15);
  CHECK(spread(corr) < 0.15);
}
