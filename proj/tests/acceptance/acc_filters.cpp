#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "damh/mjp.hpp"
#include "damh/validation.hpp"

using namespace damh;

TEST_CASE("criterion 07_pf_unbiasedness: mean ratio within 3 se of one, 1e4 replicates") {
  auto hmm = validation::pf_check_hmm(10000, 424242);
  std::printf("  [criterion 07] hmm mean ratio %.4f +- %.4f\n", hmm.mean_ratio,
              hmm.std_error);
  CHECK(std::abs(hmm.mean_ratio - 1.0) <= 3.0 * hmm.std_error);

  auto lg = validation::pf_check_lgss(10000, 424243);
  std::printf("  [criterion 07] lgss mean ratio %.4f +- %.4f\n", lg.mean_ratio,
              lg.std_error);
  CHECK(std::abs(lg.mean_ratio - 1.0) <= 3.0 * lg.std_error);
}

TEST_CASE("criterion 08_lna_correctness: Kalman match and step-halving stability") {
  auto lin = validation::lna_check_linear();
  std::printf("  [criterion 08] linear system |lna - kalman| = %.3e\n",
              lin.max_abs_err);
  CHECK(lin.max_abs_err <= 1e-6);

  // step halving on the committed 50-observation study dataset
  mjp::ObservationSeries series =
      mjp::load_dataset(DAMH_TEST_DATA_DIR "/lv_dataset.csv");
  mjp::LVParams params;
  params.x << std::log(1.0), std::log(0.005), std::log(0.6), std::log(8.0),
      std::log(8.0);
  const double l1 = mjp::lna_marginal_loglik(params, series, 0.01);
  const double l2 = mjp::lna_marginal_loglik(params, series, 0.005);
  std::printf("  [criterion 08] step halving delta = %.3e\n", std::abs(l1 - l2));
  CHECK(std::abs(l1 - l2) < 1e-8);
}
