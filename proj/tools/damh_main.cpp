// Command line front end for the delayed-acceptance pseudo-marginal RWM
// toolkit: limiting-theory calculators, chain sampling, the tuning strategy
// and the three simulation studies.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "damh/diagnostics.hpp"
#include "damh/heat.hpp"
#include "damh/io.hpp"
#include "damh/kernels.hpp"
#include "damh/mjp.hpp"
#include "damh/product_study.hpp"
#include "damh/theory.hpp"
#include "damh/tuner.hpp"
#include "damh/validation.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string g_cmdline;

std::vector<std::string> header_lines(std::uint64_t seed, bool with_seed = true) {
  std::vector<std::string> lines{"cmd: " + g_cmdline};
  if (with_seed) lines.push_back("seed: " + std::to_string(seed));
  return lines;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << std::endl;
    return;
  }
  std::ofstream out(path);
  if (!out) throw damh::DomainError("cannot open " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
  double beta1 = 0.0, beta2 = 0.0, eta = 1e-3;
  std::string mode = "dapm";
  bool do_optimize = false;
  double mu = -1.0, sigma2 = -1.0;
  damh::theory::GridSpec grid;
  std::string out;
};

int run_theory(const TheoryArgs& a) {
  using namespace damh::theory;
  ApproxQuality q(a.beta1, a.beta2);
  Mode mode = a.mode == "da" ? Mode::da : Mode::dapm;

  if (a.do_optimize) {
    OptimizeResult r = optimize(q, a.eta, mode);
    json j;
    j["config"] = {{"cmd", g_cmdline}};
    j["mu_hat"] = r.tuning.mu;
    j["sigma2_hat"] = r.tuning.sigma2;
    j["eta"] = a.eta;
    j["alpha1"] = r.point.alpha1;
    j["alpha2given1"] = r.point.alpha2given1;
    j["alpha12"] = r.point.alpha12;
    j["eff"] = r.point.eff;
    j["eff_rel"] = r.point.eff_rel;
    j["boundary_warning"] = r.boundary_warning;
    write_json(a.out, j);
    return kExitOk;
  }
  if (a.mu >= 0.0) {
    TuningPoint t(a.mu, a.sigma2 >= 0.0 ? a.sigma2 : 0.0, a.eta);
    EfficiencyPoint p = evaluate(t, q, mode);
    json j;
    j["config"] = {{"cmd", g_cmdline}};
    j["mu"] = t.mu;
    j["sigma2"] = t.sigma2;
    j["alpha1"] = p.alpha1;
    j["alpha2given1"] = p.alpha2given1;
    j["alpha12"] = p.alpha12;
    j["eff"] = p.eff;
    j["eff_rel"] = p.eff_rel;
    write_json(a.out, j);
    return kExitOk;
  }
  if (a.out.empty())
    throw damh::DomainError("theory: grid scan needs --out <csv>");
  auto rows = grid_scan(q, a.eta, mode, a.grid);
  damh::io::CsvWriter csv(a.out, header_lines(0, false),
                          {"mu", "sigma2", "beta1", "beta2", "eta", "alpha1",
                           "alpha2given1", "alpha12", "eff", "eff_rel"});
  for (const auto& p : rows)
    csv.row({p.tuning.mu, p.tuning.sigma2, a.beta1, a.beta2, a.eta, p.alpha1,
             p.alpha2given1, p.alpha12, p.eff, p.eff_rel});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BetasArgs {
  std::string surrogate = "logistic";
  double phi1 = 0.0, phi2 = 1.0;
  double ga = 0.0, gb = 1.0;  // gaussian family
  std::string out;
};

int run_betas(const BetasArgs& a) {
  using namespace damh::product;
  SurrogateError1D err;
  if (a.surrogate == "logistic") {
    err = logistic_error({a.phi1, a.phi2});
  } else if (a.surrogate == "gaussian") {
    err = gaussian_approx_error(a.ga, a.gb);
  } else {
    throw damh::DomainError("betas: unknown surrogate " + a.surrogate);
  }
  BetasResult r = betas_by_quadrature(err, {}, 1.0);
  json j;
  j["config"] = {{"cmd", g_cmdline}};
  j["surrogate"] = a.surrogate;
  j["phi1"] = a.phi1;
  j["phi2"] = a.phi2;
  j["beta1"] = r.q.beta1;
  j["beta2"] = r.q.beta2;
  j["clamped"] = r.clamped;
  write_json(a.out, j);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::string kernel = "rwm";
  std::string target = "normal";
  int d = 1;
  std::int64_t n = 0;
  std::int64_t burnin = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  double lambda = 1.0;
  double sigma2 = 1.0;
  double phi1 = 0.0, phi2 = 1.8;
  double eta = 0.0;
  std::string out, summary;
};

int run_sample(const SampleArgs& a) {
  using namespace damh;
  if (a.n < 1) throw DomainError("sample: --n must be >= 1");
  if (a.target != "normal") throw DomainError("sample: unknown target " + a.target);

  KernelConfig kc;
  kc.target = product::product_normal_target(a.d);
  kc.proposal = ProposalSpec::isotropic(a.lambda, a.d);
  if (a.kernel == "rwm") kc.kind = KernelKind::rwm;
  else if (a.kernel == "pm") kc.kind = KernelKind::pm;
  else if (a.kernel == "da") kc.kind = KernelKind::da;
  else if (a.kernel == "dapm") kc.kind = KernelKind::dapm;
  else throw DomainError("sample: unknown kernel " + a.kernel);
  if (kc.kind == KernelKind::da || kc.kind == KernelKind::dapm)
    kc.surrogate = product::logistic_surrogate(a.d, {a.phi1, a.phi2}, a.eta);
  if (kc.kind == KernelKind::pm || kc.kind == KernelKind::dapm)
    kc.estimator = product::synthetic_estimator(kc.target, a.sigma2);

  RunOptions opts;
  opts.n_iter = a.n;
  opts.seed = a.seed;
  opts.thin = a.thin;
  opts.burnin = a.burnin;

  ChainTrace trace = run_chain(kc, opts);

  if (!a.out.empty()) {
    std::vector<std::string> cols{"iter"};
    for (int j = 1; j <= a.d; ++j) cols.push_back("x_" + std::to_string(j));
    cols.push_back("log_pa");
    cols.push_back("log_phat");
    io::CsvWriter csv(a.out, header_lines(a.seed), cols);
    char buf[64];
    for (Eigen::Index r = 0; r < trace.samples.rows(); ++r) {
      std::string line = std::to_string(trace.iters[r]);
      for (int j = 0; j < a.d; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", trace.samples(r, j));
        line += buf;
      }
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", trace.log_pa[r],
                    trace.log_phat[r]);
      line += buf;
      csv.raw_row(line);
    }
  }

  auto per_coord = diag::ess_per_coordinate(trace.samples);
  json j;
  j["config"] = {{"cmd", g_cmdline}, {"seed", a.seed}};
  j["ess_harmonic"] = diag::ess_harmonic_mean(per_coord);
  j["ess_min"] = diag::ess_min(per_coord);
  j["esjd"] = diag::esjd(trace);
  j["alpha1"] = trace.counters.alpha1_hat();
  j["alpha2given1"] = trace.counters.alpha2given1_hat();
  j["cost_model"] = trace.counters.modeled_cost;
  j["wall_seconds"] = trace.counters.wall_seconds;
  write_json(a.summary, j);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LogisticArgs {
  std::vector<double> phi1s, phi2s;
  std::vector<double> scalings{2.0};
  std::vector<double> sigma2s{2.0};
  std::int64_t n = 1000000;
  int d = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

int run_experiment_logistic(const LogisticArgs& a) {
  using namespace damh;
  product::StudyConfig cfg;
  if (a.phi1s.size() != a.phi2s.size())
    throw DomainError("experiment logistic: --phi1 and --phi2 need equal lengths");
  if (a.phi1s.empty()) {
    cfg.phis = {{0, 0.6}, {0, 1.2}, {0, 1.8}, {0, 2.3},
                {0, 2.7}, {1.0, 1.2}, {0.6, 1.8}, {0.5, 2.3}};
  } else {
    for (std::size_t i = 0; i < a.phi1s.size(); ++i)
      cfg.phis.push_back({a.phi1s[i], a.phi2s[i]});
  }
  cfg.scalings = a.scalings;
  cfg.sigma2s = a.sigma2s;
  cfg.n_iter = a.n;
  cfg.d = a.d;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;

  product::StudyResult res = product::run_logistic_study(cfg);

  io::CsvWriter csv(a.out, header_lines(a.seed),
                    {"algorithm", "phi1", "phi2", "beta1", "beta2", "scaling",
                     "sigma2", "alpha1", "alpha2given1", "ess_star", "essxx_0.01",
                     "essxx_0.001", "essxx_0", "pred_alpha1", "pred_alpha2given1",
                     "pred_rel_eff"});
  auto fmt = [](double v) { return damh::io::format_double(v); };
  for (const auto& r : res.rows) {
    std::string line = r.kind == KernelKind::da ? "DA" : "DAPM";
    for (double v : {r.phi1, r.phi2, r.beta1, r.beta2, r.scaling, r.sigma2,
                     r.alpha1_hat, r.alpha2given1_hat, r.ess_star, r.ess_xx[0],
                     r.ess_xx[1], r.ess_xx[2], r.pred_alpha1, r.pred_alpha2given1,
                     r.pred_rel_eff})
      line += "," + fmt(v);
    csv.raw_row(line);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct HeatArgs {
  std::vector<double> lambdas{0.05, 0.1, 0.2};
  int n_samples = 40000;
  std::int64_t pilot_iters = 100000;
  std::uint64_t seed = 0;
  std::string out, qs_out;
};

int run_experiment_heat(const HeatArgs& a) {
  using namespace damh;
  heat::HeatProblem prob = heat::make_default_problem();
  heat::PilotResult pilot = heat::pilot_rwm(prob, a.pilot_iters, a.seed);

  io::CsvWriter csv(a.out, header_lines(a.seed),
                    {"lambda", "meanS_over_l2", "varS_over_l2", "corrQS"});
  for (double lambda : a.lambdas) {
    heat::QsMoments m =
        heat::qs_moments(prob, pilot.c0, lambda, a.n_samples, a.seed + 17);
    csv.row({lambda, m.mean_s_over_l2, m.var_s_over_l2, m.corr_qs});
  }

  if (!a.qs_out.empty()) {
    io::CsvWriter qs(a.qs_out, header_lines(a.seed), {"lambda", "q", "s"});
    for (double lambda : a.lambdas) {
      SplitRng rng(a.seed + 17);
      Eigen::VectorXd sqrt_kappa = prob.kappa.array().sqrt();
      const double lp0 = heat::log_posterior(pilot.c0, prob, heat::Forward::exact);
      auto s_at = [&](const Eigen::VectorXd& c) {
        return heat::log_likelihood(c, prob, heat::Forward::fd) -
               heat::log_likelihood(c, prob, heat::Forward::exact);
      };
      const double s0 = s_at(pilot.c0);
      const int n_raw = std::min(a.n_samples, 5000);
      for (int i = 0; i < n_raw; ++i) {
        Eigen::VectorXd c = pilot.c0;
        for (int k = 0; k < prob.K; ++k)
          c[k] += lambda * sqrt_kappa[k] * rng.normal(Stream::proposal);
        double q = heat::log_posterior(c, prob, heat::Forward::exact) - lp0;
        double s = s_at(c) - s0;
        qs.row({lambda, q, s});
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LVArgs {
  std::string data;
  bool simulate = false;
  std::vector<double> gammas{2.0, 2.5, 3.0, 3.5, 4.0};
  std::vector<int> ms{100, 150, 200, 250, 300};
  std::int64_t n_iter = 15000;
  std::int64_t burnin = 1000;
  std::int64_t pilot_iters = 40000;
  int sigma2_reps = 40;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

damh::mjp::ObservationSeries load_or_simulate(const std::string& path, bool simulate,
                                              std::uint64_t seed) {
  namespace fs = std::filesystem;
  using namespace damh::mjp;
  if (!fs::exists(path)) {
    if (!simulate)
      throw damh::DomainError("dataset " + path + " not found (use --simulate)");
    LVParams params;
    params.x << std::log(1.0), std::log(0.005), std::log(0.6), std::log(8.0),
        std::log(8.0);
    ObservationSeries series = simulate_dataset(params, {71, 79}, 50, seed);
    save_dataset(path, series, params, seed);
  }
  return load_dataset(path);
}

int run_experiment_lv(const LVArgs& a) {
  using namespace damh;
  mjp::ObservationSeries series = load_or_simulate(a.data, a.simulate, a.seed);

  Eigen::VectorXd start(5);
  start << 0.0, std::log(0.005), std::log(0.6), std::log(8.0), std::log(8.0);
  mjp::LVPilot pilot = mjp::lv_pilot(series, a.pilot_iters, a.seed + 1, start);

  io::CsvWriter csv(a.out, header_lines(a.seed),
                    {"gamma", "m", "sigma2_at_median", "mESS_per_s", "alpha1",
                     "alpha2given1"});

  // sigma2 at the median once per particle count
  std::map<int, double> sigma2_at;
  for (int m : a.ms) {
    auto draw = mjp::lv_pf_logpost(series, m);
    auto vars = mjp::estimate_sigma2({pilot.median}, draw, a.sigma2_reps, a.seed + 2 + m);
    sigma2_at[m] = vars[0];
  }

  struct Cell {
    double gamma;
    int m;
    mjp::LVRunResult res;
  };
  std::vector<Cell> cells;
  for (double g : a.gammas)
    for (int m : a.ms) cells.push_back({g, m, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& c = cells[i];
      c.res = mjp::lv_run(KernelKind::dapm, series, c.m,
                          mjp::lv_proposal_cov(pilot.cov, c.gamma), pilot.median,
                          a.n_iter, a.burnin, a.seed + 100, i + 1);
    }
  };
  int jobs = std::max(1, a.jobs);
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& c : cells)
    csv.row({c.gamma, double(c.m), sigma2_at[c.m], c.res.mess_per_second,
             c.res.counters.alpha1_hat(), c.res.counters.alpha2given1_hat()});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TuneArgs {
  std::string data;
  bool simulate = false;
  std::vector<int> step1_ms{100, 150, 200, 300};
  std::vector<double> gammas{1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5};
  std::vector<int> step3_ms{100, 150, 200, 250, 300};
  std::int64_t short_iters = 50000;
  std::int64_t pilot_iters = 40000;
  int sigma2_reps = 40;
  double eta = 0.002;
  std::uint64_t seed = 0;
  std::string out;
};

int run_tune(const TuneArgs& a) {
  using namespace damh;
  mjp::ObservationSeries series = load_or_simulate(a.data, a.simulate, a.seed);

  Eigen::VectorXd start(5);
  start << 0.0, std::log(0.005), std::log(0.6), std::log(8.0), std::log(8.0);
  mjp::LVPilot pilot = mjp::lv_pilot(series, a.pilot_iters, a.seed + 1, start);

  std::vector<Eigen::VectorXd> points{pilot.median};
  for (const auto& p : pilot.extra_points) points.push_back(p);

  tuner::TuningReport report;
  auto sigma2_eval = [&](int m) {
    auto draw = mjp::lv_pf_logpost(series, m);
    return mjp::estimate_sigma2(points, draw, a.sigma2_reps, a.seed + 2 + m);
  };
  tuner::Step1Result s1 = tuner::step1_pick_particles(a.step1_ms, sigma2_eval);
  report.m_star = s1.m_star;
  report.sigma2_min = s1.sigma2_min;
  report.sigma2_max = s1.sigma2_max;
  report.step1_flagged = s1.flagged;

  // particles that would give sigma2 ~ 1, for the modeled surrogate cost
  const double m_sigma1 = s1.m_star * std::max(0.5, s1.sigma2_max);
  const double surrogate_cost = a.eta * m_sigma1;

  std::uint64_t chain = 500;
  auto short_run = [&](double gamma, int m) {
    mjp::LVRunResult r = mjp::lv_run(
        KernelKind::dapm, series, m, mjp::lv_proposal_cov(pilot.cov, gamma),
        pilot.median, a.short_iters, a.short_iters / 10, a.seed + 7, ++chain, 1,
        surrogate_cost);
    tuner::ShortRunMetric metric;
    metric.gamma = gamma;
    metric.m = m;
    metric.min_ess = r.min_ess;
    metric.modeled_cost = r.counters.modeled_cost;
    metric.wall_seconds = r.wall_seconds;
    metric.mess_per_cost = r.counters.modeled_cost > 0 ? r.min_ess / r.counters.modeled_cost : 0.0;
    metric.mess_per_second = r.mess_per_second;
    metric.alpha1 = r.counters.alpha1_hat();
    metric.alpha2given1 = r.counters.alpha2given1_hat();
    return metric;
  };

  report.gamma_hat = tuner::step2_pick_scaling(
      a.gammas, [&](double g) { return short_run(g, s1.m_star); }, &report.step2_runs);
  report.m_hat = tuner::step3_pick_particles(
      a.step3_ms, [&](int m) { return short_run(report.gamma_hat, m); },
      &report.step3_runs);

  json j;
  j["config"] = {{"cmd", g_cmdline}, {"seed", a.seed}};
  j["m_star"] = report.m_star;
  j["sigma2_range"] = {report.sigma2_min, report.sigma2_max};
  j["step1_flagged"] = report.step1_flagged;
  j["gamma_hat"] = report.gamma_hat;
  j["m_hat"] = report.m_hat;
  auto runs_to_json = [](const std::vector<tuner::ShortRunMetric>& runs) {
    json arr = json::array();
    for (const auto& r : runs)
      arr.push_back({{"gamma", r.gamma},
                     {"m", r.m},
                     {"min_ess", r.min_ess},
                     {"modeled_cost", r.modeled_cost},
                     {"mess_per_cost", r.mess_per_cost},
                     {"mess_per_second", r.mess_per_second},
                     {"wall_seconds", r.wall_seconds},
                     {"alpha1", r.alpha1},
                     {"alpha2given1", r.alpha2given1}});
    return arr;
  };
  j["step2_runs"] = runs_to_json(report.step2_runs);
  j["step3_runs"] = runs_to_json(report.step3_runs);
  write_json(a.out, j);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_pf_check(int reps, std::uint64_t seed, const std::string& out) {
  auto hmm = damh::validation::pf_check_hmm(reps, seed);
  auto lgss = damh::validation::pf_check_lgss(reps, seed + 1);
  json j;
  j["config"] = {{"cmd", g_cmdline}, {"seed", seed}};
  j["hmm"] = {{"mean_ratio", hmm.mean_ratio},
              {"std_error", hmm.std_error},
              {"n_reps", hmm.n_reps},
              {"pass", hmm.pass}};
  j["lgss"] = {{"mean_ratio", lgss.mean_ratio},
               {"std_error", lgss.std_error},
               {"n_reps", lgss.n_reps},
               {"pass", lgss.pass}};
  write_json(out, j);
  return hmm.pass && lgss.pass ? kExitOk : kExitNumeric;
}

int run_lna_check(const std::string& out) {
  auto lin = damh::validation::lna_check_linear();
  auto step = damh::validation::lna_check_step_halving();
  json j;
  j["config"] = {{"cmd", g_cmdline}};
  j["linear_kalman_abs_err"] = lin.max_abs_err;
  j["linear_pass"] = lin.pass;
  j["step_halving_delta"] = step.delta;
  j["step_halving_pass"] = step.pass;
  write_json(out, j);
  return lin.pass && step.pass ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  g_cmdline = damh::io::command_line(argc, argv);

  CLI::App app{"delayed-acceptance pseudo-marginal RWM toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command line flags override");

  TheoryArgs th;
  auto* theory_cmd = app.add_subcommand("theory", "limiting rates and efficiency");
  theory_cmd->add_option("--beta1", th.beta1, "surrogate excess curvature");
  theory_cmd->add_option("--beta2", th.beta2, "surrogate rms gradient error");
  theory_cmd->add_option("--eta", th.eta, "relative surrogate cost");
  theory_cmd->add_option("--mode", th.mode, "dapm or da")
      ->check(CLI::IsMember({"dapm", "da"}));
  theory_cmd->add_flag("--optimize", th.do_optimize, "optimize over (mu, sigma2)");
  theory_cmd->add_option("--mu", th.mu, "evaluate at this mu");
  theory_cmd->add_option("--sigma2", th.sigma2, "evaluate at this sigma2");
  theory_cmd->add_option("--mu-min", th.grid.mu_lo);
  theory_cmd->add_option("--mu-max", th.grid.mu_hi);
  theory_cmd->add_option("--mu-n", th.grid.mu_n);
  theory_cmd->add_option("--sigma2-min", th.grid.sigma2_lo);
  theory_cmd->add_option("--sigma2-max", th.grid.sigma2_hi);
  theory_cmd->add_option("--sigma2-n", th.grid.sigma2_n);
  theory_cmd->add_option("--out", th.out, "output file (csv for grid, json otherwise)");

  BetasArgs be;
  auto* betas_cmd = app.add_subcommand("betas", "surrogate quality by quadrature");
  betas_cmd->add_option("--surrogate", be.surrogate, "logistic or gaussian")
      ->check(CLI::IsMember({"logistic", "gaussian"}));
  betas_cmd->add_option("--phi1", be.phi1, "logistic mode");
  betas_cmd->add_option("--phi2", be.phi2, "logistic inverse scale");
  betas_cmd->add_option("--a", be.ga, "gaussian approximation mean");
  betas_cmd->add_option("--b", be.gb, "gaussian approximation precision");
  betas_cmd->add_option("--out", be.out);

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "run one chain");
  sample_cmd->add_option("--kernel", sa.kernel, "rwm|pm|da|dapm")
      ->check(CLI::IsMember({"rwm", "pm", "da", "dapm"}));
  sample_cmd->add_option("--target", sa.target, "target family");
  sample_cmd->add_option("--d", sa.d, "dimension")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--n", sa.n, "iterations");
  sample_cmd->add_option("--burnin", sa.burnin);
  sample_cmd->add_option("--thin", sa.thin);
  sample_cmd->add_option("--seed", sa.seed)->required();
  sample_cmd->add_option("--lambda", sa.lambda, "proposal scale");
  sample_cmd->add_option("--sigma2", sa.sigma2, "synthetic log-noise variance");
  sample_cmd->add_option("--phi1", sa.phi1);
  sample_cmd->add_option("--phi2", sa.phi2);
  sample_cmd->add_option("--eta", sa.eta, "modeled surrogate cost");
  sample_cmd->add_option("--out", sa.out, "trace csv");
  sample_cmd->add_option("--summary", sa.summary, "summary json");

  LogisticArgs lo;
  auto* exp_cmd = app.add_subcommand("experiment", "simulation studies");
  exp_cmd->require_subcommand(1);
  auto* logi_cmd = exp_cmd->add_subcommand("logistic", "product-normal target study");
  logi_cmd->add_option("--phi1", lo.phi1s, "surrogate modes");
  logi_cmd->add_option("--phi2", lo.phi2s, "surrogate inverse scales");
  logi_cmd->add_option("--scalings", lo.scalings, "multiples of lambda*");
  logi_cmd->add_option("--sigma2s", lo.sigma2s, "DAPM noise variances");
  logi_cmd->add_option("--n", lo.n, "iterations per cell");
  logi_cmd->add_option("--d", lo.d);
  logi_cmd->add_option("--seed", lo.seed)->required();
  logi_cmd->add_option("--jobs", lo.jobs);
  logi_cmd->add_option("--out", lo.out)->required();

  HeatArgs he;
  auto* heat_cmd = exp_cmd->add_subcommand("heat", "heat-equation (Q,S) diagnostics");
  heat_cmd->add_option("--lambdas", he.lambdas);
  heat_cmd->add_option("--n-samples", he.n_samples);
  heat_cmd->add_option("--pilot-iters", he.pilot_iters);
  heat_cmd->add_option("--seed", he.seed)->required();
  heat_cmd->add_option("--out", he.out)->required();
  heat_cmd->add_option("--qs-out", he.qs_out, "raw (q,s) samples csv");

  LVArgs lv;
  auto* lv_cmd = exp_cmd->add_subcommand("lv", "Lotka-Volterra DAPsMRWM study");
  lv_cmd->add_option("--data", lv.data)->required();
  lv_cmd->add_flag("--simulate", lv.simulate, "create the dataset if missing");
  lv_cmd->add_option("--gamma", lv.gammas);
  lv_cmd->add_option("--m", lv.ms);
  lv_cmd->add_option("--n-iter", lv.n_iter);
  lv_cmd->add_option("--burnin", lv.burnin);
  lv_cmd->add_option("--pilot-iters", lv.pilot_iters);
  lv_cmd->add_option("--sigma2-reps", lv.sigma2_reps);
  lv_cmd->add_option("--seed", lv.seed)->required();
  lv_cmd->add_option("--jobs", lv.jobs);
  lv_cmd->add_option("--out", lv.out)->required();

  TuneArgs tu;
  auto* tune_cmd = app.add_subcommand("tune", "three-step tuning strategy");
  tune_cmd->add_option("--data", tu.data)->required();
  tune_cmd->add_flag("--simulate", tu.simulate);
  tune_cmd->add_option("--step1-m", tu.step1_ms);
  tune_cmd->add_option("--gamma", tu.gammas);
  tune_cmd->add_option("--step3-m", tu.step3_ms);
  tune_cmd->add_option("--short-iters", tu.short_iters);
  tune_cmd->add_option("--pilot-iters", tu.pilot_iters);
  tune_cmd->add_option("--sigma2-reps", tu.sigma2_reps);
  tune_cmd->add_option("--eta", tu.eta, "surrogate cost relative to a sigma2=1 estimate");
  tune_cmd->add_option("--seed", tu.seed)->required();
  tune_cmd->add_option("--out", tu.out);

  int pf_reps = 2000;
  std::uint64_t pf_seed = 1234;
  std::string pf_out;
  auto* pf_cmd = app.add_subcommand("pf-check", "particle filter unbiasedness checks");
  pf_cmd->add_option("--reps", pf_reps);
  pf_cmd->add_option("--seed", pf_seed);
  pf_cmd->add_option("--out", pf_out);

  std::string lna_out;
  auto* lna_cmd = app.add_subcommand("lna-check", "LNA marginal likelihood checks");
  lna_cmd->add_option("--out", lna_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*theory_cmd) return run_theory(th);
    if (*betas_cmd) return run_betas(be);
    if (*sample_cmd) return run_sample(sa);
    if (*logi_cmd) return run_experiment_logistic(lo);
    if (*heat_cmd) return run_experiment_heat(he);
    if (*lv_cmd) return run_experiment_lv(lv);
    if (*tune_cmd) return run_tune(tu);
    if (*pf_cmd) return run_pf_check(pf_reps, pf_seed, pf_out);
    if (*lna_cmd) return run_lna_check(lna_out);
  } catch (const damh::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const damh::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
