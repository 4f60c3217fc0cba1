// Python bindings for the main operations: limiting-theory calculators,
// chain kernels over the product-normal study models, ESS diagnostics, and
// the heat / Lotka-Volterra study building blocks.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "damh/diagnostics.hpp"
#include "damh/heat.hpp"
#include "damh/kernels.hpp"
#include "damh/mjp.hpp"
#include "damh/product_study.hpp"
#include "damh/theory.hpp"
#include "damh/validation.hpp"

namespace py = pybind11;
using namespace damh;

namespace {

ChainTrace run_product_chain(const std::string& kernel, int d, double lambda,
                             double sigma2, double phi1, double phi2,
                             std::int64_t n_iter, std::uint64_t seed, int thin,
                             std::int64_t burnin) {
  KernelConfig kc;
  kc.target = product::product_normal_target(d);
  kc.proposal = ProposalSpec::isotropic(lambda, d);
  if (kernel == "rwm") kc.kind = KernelKind::rwm;
  else if (kernel == "pm") kc.kind = KernelKind::pm;
  else if (kernel == "da") kc.kind = KernelKind::da;
  else if (kernel == "dapm") kc.kind = KernelKind::dapm;
  else throw DomainError("unknown kernel " + kernel);
  if (kc.kind == KernelKind::da || kc.kind == KernelKind::dapm)
    kc.surrogate = product::logistic_surrogate(d, {phi1, phi2});
  if (kc.kind == KernelKind::pm || kc.kind == KernelKind::dapm)
    kc.estimator = product::synthetic_estimator(kc.target, sigma2);
  RunOptions opts;
  opts.n_iter = n_iter;
  opts.seed = seed;
  opts.thin = thin;
  opts.burnin = burnin;
  return run_chain(kc, opts);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "delayed-acceptance pseudo-marginal RWM: theory, kernels and studies";

  // ---- theory ----
  py::class_<theory::ApproxQuality>(m, "ApproxQuality")
      .def(py::init<double, double>(), py::arg("beta1"), py::arg("beta2"))
      .def_readonly("beta1", &theory::ApproxQuality::beta1)
      .def_readonly("beta2", &theory::ApproxQuality::beta2)
      .def("rho", &theory::ApproxQuality::rho);

  m.def("gauss_g", &theory::gauss_g, py::arg("m"), py::arg("v"),
        "E[min(1, e^Z)] for Z ~ N(m, v)");
  m.def(
      "alpha1",
      [](double mu, double b1, double b2) {
        return theory::alpha1(mu, theory::ApproxQuality(b1, b2));
      },
      py::arg("mu"), py::arg("beta1"), py::arg("beta2"));
  m.def(
      "alpha12",
      [](double mu, double sigma2, double b1, double b2) {
        return theory::alpha12(mu, sigma2, theory::ApproxQuality(b1, b2));
      },
      py::arg("mu"), py::arg("sigma2"), py::arg("beta1"), py::arg("beta2"));
  m.def(
      "alpha12_da",
      [](double mu, double b1, double b2) {
        return theory::alpha12_da(mu, theory::ApproxQuality(b1, b2));
      },
      py::arg("mu"), py::arg("beta1"), py::arg("beta2"));
  m.def("eff_pm", &theory::eff_pm, py::arg("mu"), py::arg("sigma2"));
  m.def("eff_rwm", &theory::eff_rwm, py::arg("mu"));
  m.def(
      "eff_dapm",
      [](double mu, double sigma2, double eta, double b1, double b2) {
        return theory::eff_dapm(theory::TuningPoint(mu, sigma2, eta),
                                theory::ApproxQuality(b1, b2));
      },
      py::arg("mu"), py::arg("sigma2"), py::arg("eta"), py::arg("beta1"),
      py::arg("beta2"));
  m.def(
      "eff_da",
      [](double mu, double eta, double b1, double b2) {
        return theory::eff_da(mu, theory::ApproxQuality(b1, b2), eta);
      },
      py::arg("mu"), py::arg("eta"), py::arg("beta1"), py::arg("beta2"));
  m.def(
      "optimize",
      [](double b1, double b2, double eta, const std::string& mode) {
        auto r = theory::optimize(theory::ApproxQuality(b1, b2), eta,
                                  mode == "da" ? theory::Mode::da : theory::Mode::dapm);
        py::dict d;
        d["mu_hat"] = r.tuning.mu;
        d["sigma2_hat"] = r.tuning.sigma2;
        d["alpha1"] = r.point.alpha1;
        d["alpha2given1"] = r.point.alpha2given1;
        d["eff"] = r.point.eff;
        d["eff_rel"] = r.point.eff_rel;
        d["boundary_warning"] = r.boundary_warning;
        return d;
      },
      py::arg("beta1"), py::arg("beta2"), py::arg("eta"), py::arg("mode") = "dapm");
  m.def(
      "esjd_limit",
      [](double mu, double sigma2, double b1, double b2, double i_const) {
        return theory::esjd_limit(mu, sigma2, theory::ApproxQuality(b1, b2), i_const);
      },
      py::arg("mu"), py::arg("sigma2"), py::arg("beta1"), py::arg("beta2"),
      py::arg("i_const") = 1.0);

  // ---- surrogate quality ----
  m.def(
      "betas_logistic",
      [](double phi1, double phi2) {
        auto r = product::betas_by_quadrature(product::logistic_error({phi1, phi2}),
                                              {}, 1.0);
        return py::make_tuple(r.q.beta1, r.q.beta2);
      },
      py::arg("phi1"), py::arg("phi2"),
      "(beta1, beta2) of the logistic surrogate against the standard normal");
  m.def(
      "betas_from_error",
      [](const std::function<double(double)>& s, double i_const) {
        product::SurrogateError1D err;
        err.s = s;
        auto r = product::betas_by_quadrature(err, {}, i_const);
        return py::make_tuple(r.q.beta1, r.q.beta2);
      },
      py::arg("s"), py::arg("i_const") = 1.0,
      "betas of an arbitrary 1-d error function (finite-difference derivatives)");

  // ---- kernels / diagnostics ----
  py::class_<Counters>(m, "Counters")
      .def_readonly("n_iter", &Counters::n_iter)
      .def_readonly("stage1_attempts", &Counters::stage1_attempts)
      .def_readonly("stage1_accepts", &Counters::stage1_accepts)
      .def_readonly("stage2_attempts", &Counters::stage2_attempts)
      .def_readonly("stage2_accepts", &Counters::stage2_accepts)
      .def_readonly("expensive_evals", &Counters::expensive_evals)
      .def_readonly("modeled_cost", &Counters::modeled_cost)
      .def_readonly("wall_seconds", &Counters::wall_seconds)
      .def("alpha1_hat", &Counters::alpha1_hat)
      .def("alpha2given1_hat", &Counters::alpha2given1_hat)
      .def("esjd", &Counters::esjd);

  py::class_<ChainTrace>(m, "ChainTrace")
      .def_readonly("dim", &ChainTrace::dim)
      .def_readonly("samples", &ChainTrace::samples)
      .def_readonly("log_pa", &ChainTrace::log_pa)
      .def_readonly("log_phat", &ChainTrace::log_phat)
      .def_readonly("counters", &ChainTrace::counters);

  m.def("run_product_chain", &run_product_chain, py::arg("kernel"), py::arg("d"),
        py::arg("lambda_"), py::arg("sigma2") = 0.0, py::arg("phi1") = 0.0,
        py::arg("phi2") = 1.8, py::arg("n_iter") = 10000, py::arg("seed") = 1,
        py::arg("thin") = 1, py::arg("burnin") = 0,
        "RWM/PM/DA/DAPM chain on the product-normal target with the logistic "
        "surrogate and synthetic Gaussian noise");

  m.def(
      "ess_geyer",
      [](const Eigen::VectorXd& series) {
        auto r = diag::ess_geyer(std::span<const double>(series.data(), series.size()));
        py::dict d;
        d["ess"] = r.ess;
        d["iact"] = r.iact;
        d["truncation_lag"] = r.truncation_lag;
        d["degenerate"] = r.degenerate;
        return d;
      },
      py::arg("series"));

  // ---- heat equation study ----
  py::class_<heat::HeatProblem>(m, "HeatProblem")
      .def_readonly("K", &heat::HeatProblem::K)
      .def_readonly("tau", &heat::HeatProblem::tau)
      .def_readonly("sigma2_noise", &heat::HeatProblem::sigma2_noise)
      .def_readonly("obs_x", &heat::HeatProblem::obs_x)
      .def_readonly("y", &heat::HeatProblem::y);
  m.def("heat_default_problem", &heat::make_default_problem, py::arg("seed") = 4012,
        py::arg("n_obs") = 30);
  m.def(
      "heat_exact_forward",
      [](const Eigen::VectorXd& c, const Eigen::VectorXd& xs, double tau) {
        return heat::exact_forward(c, xs, tau);
      },
      py::arg("c"), py::arg("xs"), py::arg("tau"));
  m.def(
      "heat_fd_forward",
      [](const Eigen::VectorXd& c, int n_x, int n_t, double tau,
         const Eigen::VectorXd& xs) {
        return heat::fd_forward(c, {n_x, n_t}, tau, xs);
      },
      py::arg("c"), py::arg("n_x"), py::arg("n_t"), py::arg("tau"), py::arg("xs"));
  m.def(
      "heat_qs_moments",
      [](const heat::HeatProblem& p, const Eigen::VectorXd& c0, double lambda,
         int n_samples, std::uint64_t seed) {
        auto r = heat::qs_moments(p, c0, lambda, n_samples, seed);
        py::dict d;
        d["mean_s_over_l2"] = r.mean_s_over_l2;
        d["var_s_over_l2"] = r.var_s_over_l2;
        d["corr_qs"] = r.corr_qs;
        d["qcorr_q"] = r.qcorr_q;
        d["qcorr_s"] = r.qcorr_s;
        d["s_degenerate"] = r.s_degenerate;
        return d;
      },
      py::arg("problem"), py::arg("c0"), py::arg("lambda_"), py::arg("n_samples"),
      py::arg("seed"));
  m.def(
      "heat_pilot",
      [](const heat::HeatProblem& p, std::int64_t n_iter, std::uint64_t seed) {
        auto r = heat::pilot_rwm(p, n_iter, seed);
        return py::make_tuple(r.c0, r.lambda, r.accept_rate);
      },
      py::arg("problem"), py::arg("n_iter"), py::arg("seed"));

  // ---- Lotka-Volterra study ----
  m.def(
      "lv_simulate_dataset",
      [](const Eigen::VectorXd& x, long long u1, long long u2, int n,
         std::uint64_t seed) {
        mjp::LVParams params;
        params.x = x;
        auto series = mjp::simulate_dataset(params, {u1, u2}, n, seed);
        Eigen::MatrixXd ys(series.n(), 2);
        for (int t = 0; t < series.n(); ++t) ys.row(t) = series.y[t].transpose();
        return ys;
      },
      py::arg("x"), py::arg("u1"), py::arg("u2"), py::arg("n"), py::arg("seed"));
  m.def(
      "lv_pf_loglik",
      [](const Eigen::VectorXd& x, long long u1, long long u2,
         const Eigen::MatrixXd& ys, int m, std::uint64_t seed) {
        mjp::LVParams params;
        params.x = x;
        mjp::ObservationSeries series;
        series.u0 = {u1, u2};
        for (Eigen::Index t = 0; t < ys.rows(); ++t)
          series.y.push_back(ys.row(t).transpose());
        SplitRng rng(seed);
        return mjp::bootstrap_pf_loglik(params, series, m, rng);
      },
      py::arg("x"), py::arg("u1"), py::arg("u2"), py::arg("ys"), py::arg("m"),
      py::arg("seed"));
  m.def(
      "lv_lna_loglik",
      [](const Eigen::VectorXd& x, long long u1, long long u2,
         const Eigen::MatrixXd& ys, double dt) {
        mjp::LVParams params;
        params.x = x;
        mjp::ObservationSeries series;
        series.u0 = {u1, u2};
        for (Eigen::Index t = 0; t < ys.rows(); ++t)
          series.y.push_back(ys.row(t).transpose());
        return mjp::lna_marginal_loglik(params, series, dt);
      },
      py::arg("x"), py::arg("u1"), py::arg("u2"), py::arg("ys"), py::arg("dt") = 0.01);
  m.def(
      "gillespie_lv",
      [](const Eigen::VectorXd& x, long long u1, long long u2, double t_span,
         std::uint64_t seed) {
        mjp::LVParams params;
        params.x = x;
        SplitRng rng(seed);
        Eigen::VectorXi u(2);
        u << int(u1), int(u2);
        auto r = mjp::gillespie_simulate(mjp::lv_network(params), u, t_span, rng);
        return py::make_tuple(r.state[0], r.state[1], r.overflow, r.n_events);
      },
      py::arg("x"), py::arg("u1"), py::arg("u2"), py::arg("t_span"), py::arg("seed"));

  // ---- validation ----
  m.def("pf_check_hmm", [](int reps, std::uint64_t seed) {
    auto c = validation::pf_check_hmm(reps, seed);
    return py::make_tuple(c.mean_ratio, c.std_error, c.pass);
  });
  m.def("pf_check_lgss", [](int reps, std::uint64_t seed) {
    auto c = validation::pf_check_lgss(reps, seed);
    return py::make_tuple(c.mean_ratio, c.std_error, c.pass);
  });
  m.def("lna_check_linear", []() {
    auto c = validation::lna_check_linear();
    return py::make_tuple(c.max_abs_err, c.pass);
  });

  // mapped exceptions keep the library's error categories visible in python
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
}
