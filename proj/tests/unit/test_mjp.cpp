#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "../support/oracles.hpp"
#include "damh/lgss.hpp"
#include "damh/mjp.hpp"
#include "damh/validation.hpp"

using namespace damh;
using namespace damh::mjp;

namespace {

LVParams paper_params() {
  LVParams p;
  p.x << std::log(1.0), std::log(0.005), std::log(0.6), std::log(8.0), std::log(8.0);
  return p;
}

}  // namespace

TEST_CASE("gillespie: absorbing empty state and pure-birth mean") {
  LVParams p = paper_params();
  StochasticNetwork net = lv_network(p);
  SplitRng rng(1);
  Eigen::VectorXi empty(2);
  empty << 0, 0;
  auto r = gillespie_simulate(net, empty, 5.0, rng);
  CHECK(r.state[0] == 0);
  CHECK(r.state[1] == 0);
  CHECK(r.n_events == 0);

  // c2 = c3 = 0: prey is a linear birth process with E[U1(t)] = u1 e^{c1 t}
  LVParams birth;
  birth.x << std::log(0.7), -30.0, -30.0, 0.0, 0.0;  // c2, c3 effectively 0
  StochasticNetwork bnet;
  bnet.stoich.resize(2, 3);
  bnet.stoich << 1, -1, 0, 0, 1, -1;
  const double c1 = birth.c1();
  bnet.rates = [c1](const Eigen::VectorXi& u) {
    Eigen::VectorXd h(3);
    h << c1 * u[0], 0.0, 0.0;
    return h;
  };
  const int n_paths = 100000;
  const double t = 1.0;
  double mean = 0.0;
  Eigen::VectorXi u0(2);
  u0 << 10, 0;
  std::vector<double> ends(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    SplitRng prng(100, i);
    ends[i] = gillespie_simulate(bnet, u0, t, prng).state[0];
    mean += ends[i];
  }
  mean /= n_paths;
  double var = 0.0;
  for (double e : ends) var += (e - mean) * (e - mean);
  var /= (n_paths - 1);
  const double expected = 10.0 * std::exp(c1 * t);
  CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(var / n_paths));
}

TEST_CASE("gillespie paths at the study parameters oscillate in a sane range") {
  // mean populations over [0, 50] stay inside (0, 1e3) for nearly all paths
  LVParams p = paper_params();
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    SplitRng rng(55, i);
    LVState u{71, 79};
    double mean1 = u.u1, mean2 = u.u2;
    bool overflow = false;
    for (int t = 1; t <= 50; ++t) {
      if (!lv_advance(p, u, 1.0, rng, Stream::data)) {
        overflow = true;
        break;
      }
      mean1 += u.u1;
      mean2 += u.u2;
    }
    mean1 /= 51.0;
    mean2 /= 51.0;
    if (!overflow && mean1 > 0.0 && mean1 < 1000.0 && mean2 > 0.0 && mean2 < 1000.0)
      ++ok;
  }
  CHECK(ok >= 95);
}

TEST_CASE("gillespie matches matrix-exponential transition probabilities") {
  // two-state birth-death CTMC: birth a when empty, death b when occupied
  const double a = 0.8, b = 1.3, t = 0.7;
  StochasticNetwork net;
  net.stoich.resize(1, 2);
  net.stoich << 1, -1;
  net.rates = [a, b](const Eigen::VectorXi& u) {
    Eigen::VectorXd h(2);
    h << (u[0] == 0 ? a : 0.0), b * u[0];
    return h;
  };
  Eigen::Matrix2d P = oracles::two_state_ctmc(a, b, t);
  const int n = 100000;
  int count1 = 0;
  Eigen::VectorXi u0(1);
  u0 << 0;
  for (int i = 0; i < n; ++i) {
    SplitRng rng(9, i);
    count1 += gillespie_simulate(net, u0, t, rng).state[0];
  }
  double tv = std::abs(double(count1) / n - P(0, 1));
  CHECK(tv < 0.01);
}

TEST_CASE("dataset simulation: noiseless observations and the committed fixture") {
  LVParams noiseless = paper_params();
  noiseless.x[3] = -40.0;  // s1 -> 0
  noiseless.x[4] = -40.0;
  ObservationSeries s = simulate_dataset(noiseless, {30, 20}, 3, 12);
  CHECK(s.y[0][0] == doctest::Approx(30.0));
  CHECK(s.y[0][1] == doctest::Approx(20.0));
  for (const auto& y : s.y) {
    CHECK(y[0] == doctest::Approx(std::round(y[0])));
    CHECK(y[1] == doctest::Approx(std::round(y[1])));
  }

  ObservationSeries one = simulate_dataset(paper_params(), {71, 79}, 1, 5);
  CHECK(one.n() == 1);

  // the committed fixture regenerates bit-exactly from its seed
  const char* fixture = DAMH_TEST_DATA_DIR "/lv_dataset.csv";
  REQUIRE(std::filesystem::exists(fixture));
  ObservationSeries ref = load_dataset(fixture);
  ObservationSeries fresh = simulate_dataset(paper_params(), {71, 79}, 50, 20240811);
  REQUIRE(ref.n() == fresh.n());
  for (int t = 0; t < ref.n(); ++t) {
    CHECK(ref.y[t][0] == fresh.y[t][0]);
    CHECK(ref.y[t][1] == fresh.y[t][1]);
  }
}

TEST_CASE("systematic resampling: exact expected copies by enumeration") {
  std::vector<double> w = {0.05, 0.3, 0.15, 0.5};
  const int m = 5;
  const int J = 1000000;
  std::vector<double> copies(w.size(), 0.0);
  for (int j = 0; j < J; ++j) {
    double u = (j + 0.5) / J;
    for (int idx : systematic_resample(w, m, u)) copies[idx] += 1.0;
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(copies[i] / J == doctest::Approx(m * w[i]).epsilon(1e-4));
}

TEST_CASE("particle filter is unbiased on the enumerable HMM and the Kalman harness") {
  auto hmm = validation::pf_check_hmm(3000, 17);
  CHECK(std::abs(hmm.mean_ratio - 1.0) <= 3.0 * hmm.std_error);
  auto lg = validation::pf_check_lgss(2000, 18);
  CHECK(std::abs(lg.mean_ratio - 1.0) <= 3.0 * lg.std_error);
}

TEST_CASE("pf degenerates to -inf only when every weight dies") {
  LVParams p = paper_params();
  ObservationSeries s = simulate_dataset(p, {71, 79}, 3, 77);
  s.y[1][0] = std::numeric_limits<double>::infinity();  // kills every weight
  SplitRng rng(3);
  double ll = bootstrap_pf_loglik(p, s, 30, rng);
  CHECK(std::isinf(ll));
  CHECK(ll < 0);

  // a merely extreme observation keeps the estimate finite
  ObservationSeries s2 = simulate_dataset(p, {71, 79}, 3, 77);
  s2.y[1][0] = 1e6;
  SplitRng rng2(3);
  CHECK(std::isfinite(bootstrap_pf_loglik(p, s2, 30, rng2)));
}

TEST_CASE("lna integrator: frozen state at zero rates, linear closed form, order") {
  // all rates zero: z and V stay put
  LNASystem frozen;
  frozen.stoich = Eigen::MatrixXd::Zero(2, 3);
  frozen.stoich << 1, -1, 0, 0, 1, -1;
  frozen.rates = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(3); };
  frozen.jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(2, 2); };
  LNAState st;
  st.z = Eigen::Vector2d(4.0, 7.0);
  st.V = Eigen::Matrix2d::Identity();
  LNAState out = lna_integrate(frozen, st, 3.0, 0.01);
  CHECK((out.z - st.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.V - st.V).cwiseAbs().maxCoeff() == 0.0);

  // immigration-death: closed-form mean and variance
  const double c1 = 2.0, c2 = 0.25;
  LNASystem sys;
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
  LNAState init;
  init.z = Eigen::VectorXd::Constant(1, 10.0);
  init.V = Eigen::MatrixXd::Zero(1, 1);
  const double t = 1.0;
  LNAState got = lna_integrate(sys, init, t, 0.01);
  const double zt = c1 / c2 + (10.0 - c1 / c2) * std::exp(-c2 * t);
  const double vt = c1 * (1.0 - std::exp(-2.0 * c2 * t)) / c2 +
                    (c2 * 10.0 - c1) * std::exp(-2.0 * c2 * t) *
                        (std::exp(c2 * t) - 1.0) / c2;
  CHECK(got.z[0] == doctest::Approx(zt).epsilon(1e-6));
  CHECK(got.V(0, 0) == doctest::Approx(vt).epsilon(1e-6));

  // halving the step barely moves the LV output (4th order)
  auto step = validation::lna_check_step_halving();
  CHECK(step.delta < 1e-8);
}

TEST_CASE("lna marginal likelihood: n = 1 closed form and determinism") {
  LVParams p = paper_params();
  ObservationSeries s;
  s.u0 = {71, 79};
  s.y.push_back(Eigen::Vector2d(70.0, 82.0));
  const double s1 = p.s1(), s2 = p.s2();
  double expected = -0.5 * std::pow((70.0 - 71.0) / s1, 2) -
                    0.5 * std::pow((82.0 - 79.0) / s2, 2) - std::log(s1) -
                    std::log(s2) - std::log(2.0 * M_PI);
  CHECK(lna_marginal_loglik(p, s) == doctest::Approx(expected).epsilon(1e-12));

  ObservationSeries longer = simulate_dataset(p, {71, 79}, 10, 8);
  CHECK(lna_marginal_loglik(p, longer) == lna_marginal_loglik(p, longer));
}

TEST_CASE("lna matches an independent Kalman filter on the linear system") {
  auto lin = validation::lna_check_linear();
  CHECK(lin.max_abs_err <= 1e-6);
}

TEST_CASE("lna covariance stays positive semdefinite over a long horizon") {
  LVParams p = paper_params();
  LNASystem sys = lv_lna_system(p);
  LNAState st;
  st.z = Eigen::Vector2d(71.0, 79.0);
  st.V = Eigen::Matrix2d::Zero();
  for (int t = 0; t < 50; ++t) {
    st = lna_integrate(sys, st, 1.0, 0.01);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(st.V);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK((st.V - st.V.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("estimate_sigma2: zero for a deterministic estimator, 1/m scaling") {
  std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Zero(2)};
  auto deterministic = [](const Eigen::VectorXd&, SplitRng&) { return -12.5; };
  auto v0 = estimate_sigma2(pts, deterministic, 20, 5);
  CHECK(v0[0] == doctest::Approx(0.0));

  // particle-filter variance halves roughly like 1/m
  LVParams p = paper_params();
  ObservationSeries s = simulate_dataset(p, {71, 79}, 12, 6);
  std::vector<Eigen::VectorXd> at{p.x};
  auto d100 = estimate_sigma2(at, lv_pf_logpost(s, 60), 40, 7);
  auto d400 = estimate_sigma2(at, lv_pf_logpost(s, 240), 40, 7);
  CHECK(d400[0] / d100[0] > 0.10);
  CHECK(d400[0] / d100[0] < 0.55);
}

TEST_CASE("prior support gate feeds stage one") {
  ObservationSeries s = simulate_dataset(paper_params(), {71, 79}, 5, 9);
  auto sur = lv_surrogate_logpost(s);
  Eigen::VectorXd inside = paper_params().x;
  Eigen::VectorXd outside = inside;
  outside[0] = 9.0;
  CHECK(std::isfinite(sur(inside)));
  CHECK(std::isinf(sur(outside)));
}
