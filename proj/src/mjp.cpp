#include "damh/mjp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "damh/diagnostics.hpp"
#include "damh/errors.hpp"
#include "damh/math.hpp"

#include <nlohmann/json.hpp>

namespace damh::mjp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long long kPopulationGuard = 1000000000LL;  // 1e9
}  // namespace

GillespieResult gillespie_simulate(const StochasticNetwork& net,
                                   const Eigen::VectorXi& u0, double t_span,
                                   SplitRng& rng, Stream stream) {
  if (t_span < 0.0) throw DomainError("gillespie_simulate: t_span must be >= 0");
  GillespieResult res;
  res.state = u0;
  Eigen::VectorXi& u = res.state;
  const int n_react = static_cast<int>(net.stoich.cols());
  double t = 0.0;
  for (;;) {
    if (u.cast<long long>().maxCoeff() > kPopulationGuard) {
      res.overflow = true;
      return res;
    }
    Eigen::VectorXd h = net.rates(u);
    double h0 = h.sum();
    if (h0 <= 0.0) return res;  // absorbing
    t += rng.exponential(stream, h0);
    if (t > t_span) return res;
    double pick = rng.uniform(stream) * h0;
    int r = 0;
    double acc = h[0];
    while (r < n_react - 1 && pick > acc) acc += h[++r];
    u += net.stoich.col(r);
    res.n_events++;
  }
}

namespace {

// Allocation-free Gillespie step over one L-V interval; consumes the RNG
// stream exactly like the generic gillespie_simulate (one exponential, one
// uniform per event) so the two paths are interchangeable.
struct LVFast {
  double c1, c2, c3;

  bool advance(long long& u1, long long& u2, double t_span, SplitRng& rng,
               Stream stream) const {
    double t = 0.0;
    for (;;) {
      if (u1 > kPopulationGuard || u2 > kPopulationGuard) return false;
      const double h1 = c1 * double(u1);
      const double h2 = c2 * double(u1) * double(u2);
      const double h3 = c3 * double(u2);
      const double h0 = h1 + h2 + h3;
      if (h0 <= 0.0) return true;
      t += rng.exponential(stream, h0);
      if (t > t_span) return true;
      const double pick = rng.uniform(stream) * h0;
      if (pick <= h1) {
        ++u1;
      } else if (pick <= h1 + h2) {
        --u1;
        ++u2;
      } else {
        --u2;
      }
    }
  }
};

}  // namespace

bool lv_advance(const LVParams& params, LVState& state, double t_span, SplitRng& rng,
                Stream stream) {
  const LVFast fast{params.c1(), params.c2(), params.c3()};
  return fast.advance(state.u1, state.u2, t_span, rng, stream);
}

bool LVParams::in_prior_support() const {
  for (int i = 0; i < 5; ++i)
    if (!(x[i] >= -8.0 && x[i] <= 8.0)) return false;
  return true;
}

double LVParams::log_prior(const Eigen::VectorXd& x) {
  if (x.size() != 5) return -kInf;
  for (int i = 0; i < 5; ++i)
    if (!(x[i] >= -8.0 && x[i] <= 8.0)) return -kInf;
  return 0.0;
}

StochasticNetwork lv_network(const LVParams& params) {
  StochasticNetwork net;
  net.stoich.resize(2, 3);
  net.stoich << 1, -1, 0,
                0, 1, -1;
  const double c1 = params.c1(), c2 = params.c2(), c3 = params.c3();
  net.rates = [c1, c2, c3](const Eigen::VectorXi& u) {
    Eigen::VectorXd h(3);
    h << c1 * u[0], c2 * u[0] * double(u[1]), c3 * u[1];
    return h;
  };
  return net;
}

ObservationSeries simulate_dataset(const LVParams& params, const LVState& u0, int n,
                                   std::uint64_t seed) {
  if (n < 1) throw DomainError("simulate_dataset: n must be >= 1");
  SplitRng rng(seed);
  StochasticNetwork net = lv_network(params);
  ObservationSeries series;
  series.u0 = u0;
  Eigen::VectorXi u(2);
  u << static_cast<int>(u0.u1), static_cast<int>(u0.u2);
  const double s1 = params.s1(), s2 = params.s2();
  auto observe = [&](const Eigen::VectorXi& state) {
    Eigen::Vector2d y;
    y[0] = state[0] + s1 * rng.normal(Stream::data);
    y[1] = state[1] + s2 * rng.normal(Stream::data);
    series.y.push_back(y);
  };
  observe(u);
  for (int t = 1; t < n; ++t) {
    GillespieResult g = gillespie_simulate(net, u, 1.0, rng, Stream::data);
    if (g.overflow) throw NumericError("simulate_dataset: population overflow");
    u = g.state;
    observe(u);
  }
  return series;
}

void save_dataset(const std::string& path, const ObservationSeries& series,
                  const LVParams& params, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DomainError("save_dataset: cannot open " + path);
  nlohmann::json header;
  header["seed"] = seed;
  header["u0"] = {series.u0.u1, series.u0.u2};
  header["x"] = std::vector<double>(params.x.data(), params.x.data() + 5);
  out << "# " << header.dump() << "\n";
  out << "t,y1,y2\n";
  char buf[128];
  for (int t = 0; t < series.n(); ++t) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", t, series.y[t][0],
                  series.y[t][1]);
    out << buf;
  }
}

ObservationSeries load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("load_dataset: cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# ", 0) != 0) throw DomainError("load_dataset: missing header");
  nlohmann::json header = nlohmann::json::parse(line.substr(2));
  ObservationSeries series;
  series.u0.u1 = header["u0"][0].get<long long>();
  series.u0.u2 = header["u0"][1].get<long long>();
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    Eigen::Vector2d y;
    std::getline(ss, tok, ',');
    y[0] = std::stod(tok);
    std::getline(ss, tok, ',');
    y[1] = std::stod(tok);
    series.y.push_back(y);
  }
  return series;
}

std::vector<int> systematic_resample(const std::vector<double>& weights, int m,
                                     double u) {
  const int n = static_cast<int>(weights.size());
  if (n == 0 || m <= 0) throw DomainError("systematic_resample: empty input");
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DomainError("systematic_resample: zero total weight");
  std::vector<int> idx(m);
  double cum = weights[0];
  int j = 0;
  for (int i = 0; i < m; ++i) {
    const double point = (u + i) / m * total;
    while (point > cum && j < n - 1) cum += weights[++j];
    idx[i] = j;
  }
  return idx;
}

template <class State>
double bootstrap_pf_core(std::vector<State>& particles,
                         const std::function<void(State&, SplitRng&)>& propagate,
                         const std::function<double(const State&, int t)>& log_weight,
                         int t_begin, int t_end, SplitRng& rng) {
  const int m = static_cast<int>(particles.size());
  double loglik = 0.0;
  std::vector<double> logw(m), w(m);
  for (int t = t_begin; t < t_end; ++t) {
    double maxw = -kInf;
    for (int i = 0; i < m; ++i) {
      propagate(particles[i], rng);
      logw[i] = log_weight(particles[i], t);
      maxw = std::max(maxw, logw[i]);
    }
    if (!(maxw > -kInf)) return -kInf;  // filter degenerate
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      w[i] = std::exp(logw[i] - maxw);
      sum += w[i];
    }
    loglik += maxw + std::log(sum / m);
    std::vector<int> idx = systematic_resample(w, m, rng.uniform(Stream::estimator));
    std::vector<State> next(m);
    for (int i = 0; i < m; ++i) next[i] = particles[idx[i]];
    particles.swap(next);
  }
  return loglik;
}

// explicit instantiations for the state types used in the library and tests
template double bootstrap_pf_core<Eigen::VectorXi>(
    std::vector<Eigen::VectorXi>&,
    const std::function<void(Eigen::VectorXi&, SplitRng&)>&,
    const std::function<double(const Eigen::VectorXi&, int)>&, int, int, SplitRng&);
template double bootstrap_pf_core<double>(
    std::vector<double>&, const std::function<void(double&, SplitRng&)>&,
    const std::function<double(const double&, int)>&, int, int, SplitRng&);
template double bootstrap_pf_core<int>(
    std::vector<int>&, const std::function<void(int&, SplitRng&)>&,
    const std::function<double(const int&, int)>&, int, int, SplitRng&);
template double bootstrap_pf_core<Eigen::VectorXd>(
    std::vector<Eigen::VectorXd>&,
    const std::function<void(Eigen::VectorXd&, SplitRng&)>&,
    const std::function<double(const Eigen::VectorXd&, int)>&, int, int, SplitRng&);

namespace {

double log_normal_pdf(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

}  // namespace

double bootstrap_pf_loglik(const LVParams& params, const ObservationSeries& series,
                           int m, SplitRng& rng) {
  if (m < 1) throw DomainError("bootstrap_pf_loglik: m must be >= 1");
  if (series.n() < 1) throw DomainError("bootstrap_pf_loglik: empty series");
  const double s1 = params.s1(), s2 = params.s2();
  if (!(s1 > 0.0) || !(s2 > 0.0)) return -kInf;

  // first observation coincides with the known initial state
  Eigen::VectorXi u0(2);
  u0 << static_cast<int>(series.u0.u1), static_cast<int>(series.u0.u2);
  double loglik = log_normal_pdf(series.y[0][0], u0[0], s1) +
                  log_normal_pdf(series.y[0][1], u0[1], s2);
  if (series.n() == 1) return loglik;

  std::vector<Eigen::VectorXi> particles(m, u0);
  std::function<void(Eigen::VectorXi&, SplitRng&)> propagate =
      [&params](Eigen::VectorXi& u, SplitRng& r) {
        if (u[0] < 0) return;  // already flagged
        LVState st{u[0], u[1]};
        if (!lv_advance(params, st, 1.0, r, Stream::estimator)) {
          u[0] = -1;  // overflow: weight becomes -inf below
          return;
        }
        u[0] = static_cast<int>(st.u1);
        u[1] = static_cast<int>(st.u2);
      };
  std::function<double(const Eigen::VectorXi&, int)> log_weight =
      [&series, s1, s2](const Eigen::VectorXi& u, int t) {
        if (u[0] < 0) return -kInf;
        return log_normal_pdf(series.y[t][0], u[0], s1) +
               log_normal_pdf(series.y[t][1], u[1], s2);
      };
  double rest = bootstrap_pf_core<Eigen::VectorXi>(particles, propagate, log_weight, 1,
                                                   series.n(), rng);
  return loglik + rest;
}

LNASystem lv_lna_system(const LVParams& params) {
  LNASystem sys;
  sys.stoich.resize(2, 3);
  sys.stoich << 1, -1, 0,
                0, 1, -1;
  const double c1 = params.c1(), c2 = params.c2(), c3 = params.c3();
  sys.rates = [c1, c2, c3](const Eigen::VectorXd& z) {
    Eigen::VectorXd h(3);
    h << c1 * z[0], c2 * z[0] * z[1], c3 * z[1];
    return h;
  };
  sys.jacobian = [c1, c2, c3](const Eigen::VectorXd& z) {
    Eigen::MatrixXd f(2, 2);
    f << c1 - c2 * z[1], -c2 * z[0],
         c2 * z[1], c2 * z[0] - c3;
    return f;
  };
  return sys;
}

namespace {

struct LNADeriv {
  Eigen::VectorXd dz;
  Eigen::MatrixXd dV;
};

LNADeriv lna_rhs(const LNASystem& sys, const Eigen::VectorXd& z,
                 const Eigen::MatrixXd& V) {
  LNADeriv d;
  Eigen::VectorXd h = sys.rates(z);
  Eigen::MatrixXd F = sys.jacobian(z);
  d.dz = sys.stoich * h;
  d.dV = V * F.transpose() + sys.stoich * h.asDiagonal() * sys.stoich.transpose() +
         F * V;
  return d;
}

}  // namespace

LNAState lna_integrate(const LNASystem& sys, LNAState state, double t_span,
                       double dt) {
  if (!(dt > 0.0)) throw DomainError("lna_integrate: dt must be > 0");
  const int n_steps = std::max(1, static_cast<int>(std::lround(t_span / dt)));
  const double h = t_span / n_steps;
  for (int s = 0; s < n_steps; ++s) {
    LNADeriv k1 = lna_rhs(sys, state.z, state.V);
    LNADeriv k2 = lna_rhs(sys, state.z + 0.5 * h * k1.dz, state.V + 0.5 * h * k1.dV);
    LNADeriv k3 = lna_rhs(sys, state.z + 0.5 * h * k2.dz, state.V + 0.5 * h * k2.dV);
    LNADeriv k4 = lna_rhs(sys, state.z + h * k3.dz, state.V + h * k3.dV);
    state.z += (h / 6.0) * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
    state.V += (h / 6.0) * (k1.dV + 2.0 * k2.dV + 2.0 * k3.dV + k4.dV);
    state.V = 0.5 * (state.V + state.V.transpose()).eval();
    if (!state.z.allFinite() || state.z.cwiseAbs().maxCoeff() > 1e12)
      throw NumericError("lna_integrate: mean path blow-up");
  }
  return state;
}

namespace {

double log_mvn_generic(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("lna_marginal_loglik: forecast covariance not SPD");
  Eigen::VectorXd r = llt.matrixL().solve(y - mean);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * r.squaredNorm() - 0.5 * logdet - cov.rows() * kLogSqrt2Pi;
}

}  // namespace

double lna_marginal_loglik_generic(const LNASystem& sys, const Eigen::VectorXd& u0,
                                   const std::vector<Eigen::VectorXd>& ys,
                                   const Eigen::MatrixXd& obs_cov, double dt) {
  if (ys.empty()) throw DomainError("lna_marginal_loglik: empty series");
  const Eigen::Index d = u0.size();
  double loglik = log_mvn_generic(ys[0], u0, obs_cov);

  Eigen::VectorXd a = u0;                            // filtered mean
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);   // filtered covariance
  for (std::size_t t = 0; t + 1 < ys.size(); ++t) {
    LNAState st;
    st.z = a;
    st.V = C;
    st = lna_integrate(sys, st, 1.0, dt);
    Eigen::VectorXd z1 = st.z;
    Eigen::MatrixXd V1 = st.V;
    // keep the prior covariance PSD against integration round-off
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V1);
    if (es.eigenvalues().minCoeff() < 0.0) {
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      V1 = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    }
    Eigen::MatrixXd forecast = V1 + obs_cov;
    loglik += log_mvn_generic(ys[t + 1], z1, forecast);
    Eigen::MatrixXd gain = V1 * forecast.inverse();
    a = z1 + gain * (ys[t + 1] - z1);
    C = V1 - gain * V1;
    C = 0.5 * (C + C.transpose()).eval();
  }
  return loglik;
}

double lna_marginal_loglik(const LVParams& params, const ObservationSeries& series,
                           double dt) {
  if (series.n() < 1) throw DomainError("lna_marginal_loglik: empty series");
  const double s1 = params.s1(), s2 = params.s2();
  if (!(s1 > 0.0) || !(s2 > 0.0)) return -kInf;
  Eigen::MatrixXd sigma = Eigen::Vector2d(s1 * s1, s2 * s2).asDiagonal();
  Eigen::VectorXd u0(2);
  u0 << static_cast<double>(series.u0.u1), static_cast<double>(series.u0.u2);
  std::vector<Eigen::VectorXd> ys(series.y.begin(), series.y.end());
  return lna_marginal_loglik_generic(lv_lna_system(params), u0, ys, sigma, dt);
}

std::vector<double> estimate_sigma2(
    const std::vector<Eigen::VectorXd>& points,
    const std::function<double(const Eigen::VectorXd&, SplitRng&)>& loglik_draw,
    int n_reps, std::uint64_t seed) {
  if (n_reps < 10) throw DomainError("estimate_sigma2: need n_reps >= 10");
  std::vector<double> out;
  out.reserve(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    SplitRng rng(seed, /*chain_id=*/p + 1);
    std::vector<double> draws(n_reps);
    for (int r = 0; r < n_reps; ++r) draws[r] = loglik_draw(points[p], rng);
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= n_reps;
    double var = 0.0;
    for (double d : draws) var += (d - mean) * (d - mean);
    out.push_back(var / (n_reps - 1));
  }
  return out;
}

std::function<double(const Eigen::VectorXd&)> lv_surrogate_logpost(
    const ObservationSeries& series, double dt) {
  // copy the series into the closure; chains outlive the caller's locals
  ObservationSeries s = series;
  return [s, dt](const Eigen::VectorXd& x) {
    double lp = LVParams::log_prior(x);
    if (!(lp > -kInf)) return -kInf;
    LVParams params;
    params.x = x;
    try {
      return lp + lna_marginal_loglik(params, s, dt);
    } catch (const NumericError&) {
      return -kInf;  // diverging LNA path: treat as out of support
    }
  };
}

std::function<double(const Eigen::VectorXd&, SplitRng&)> lv_pf_logpost(
    const ObservationSeries& series, int m) {
  ObservationSeries s = series;
  return [s, m](const Eigen::VectorXd& x, SplitRng& rng) {
    double lp = LVParams::log_prior(x);
    if (!(lp > -kInf)) return -kInf;
    LVParams params;
    params.x = x;
    return lp + bootstrap_pf_loglik(params, s, m, rng);
  };
}

LVPilot lv_pilot(const ObservationSeries& series, std::int64_t n_iter,
                 std::uint64_t seed, const Eigen::VectorXd& start) {
  TargetModel target;
  target.dim = 5;
  auto logpost = lv_surrogate_logpost(series);
  target.log_density = logpost;

  SplitRng rng(seed);
  ChainState state;
  state.x = start;
  state.log_pa_x = state.log_phat_x = logpost(start);

  // three adaptation phases on a diagonal scale, then a fixed-scale stretch
  double scale = 0.05;
  const std::int64_t phase_len = std::max<std::int64_t>(500, n_iter / 8);
  double rate = 0.0;
  for (int phase = 0; phase < 4; ++phase) {
    ProposalSpec prop = ProposalSpec::isotropic(scale, 5);
    std::int64_t acc = 0;
    for (std::int64_t k = 0; k < phase_len; ++k)
      acc += rwm_step(state, target, prop, rng).stage1_accepted;
    rate = double(acc) / double(phase_len);
    scale *= std::exp(1.5 * (rate - 0.25));
  }

  const std::int64_t tail = std::max<std::int64_t>(1000, n_iter / 2);
  const int thin = 10;
  std::vector<Eigen::VectorXd> kept;
  kept.reserve(tail / thin + 1);
  ProposalSpec prop = ProposalSpec::isotropic(scale, 5);
  std::int64_t acc = 0;
  for (std::int64_t k = 0; k < tail; ++k) {
    acc += rwm_step(state, target, prop, rng).stage1_accepted;
    if (k % thin == 0) kept.push_back(state.x);
  }

  LVPilot pilot;
  pilot.accept_rate = double(acc) / double(tail);
  const int n = static_cast<int>(kept.size());
  Eigen::MatrixXd samples(n, 5);
  for (int i = 0; i < n; ++i) samples.row(i) = kept[i].transpose();

  pilot.median.resize(5);
  for (int j = 0; j < 5; ++j) {
    std::vector<double> col(samples.col(j).data(), samples.col(j).data() + n);
    std::nth_element(col.begin(), col.begin() + n / 2, col.end());
    pilot.median[j] = col[n / 2];
  }
  Eigen::RowVectorXd mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean;
  pilot.cov = centered.transpose() * centered / double(n - 1);
  // spread representative points: evenly spaced draws from the kept samples
  for (int j = 1; j <= 4; ++j) pilot.extra_points.push_back(kept[(j * n) / 5]);
  return pilot;
}

Eigen::MatrixXd lv_proposal_cov(const Eigen::MatrixXd& cov, double gamma) {
  return gamma * gamma * (2.56 * 2.56 / 5.0) * cov;
}

LVRunResult lv_run(KernelKind kind, const ObservationSeries& series, int m,
                   const Eigen::MatrixXd& proposal_cov, const Eigen::VectorXd& init,
                   std::int64_t n_iter, std::int64_t burnin, std::uint64_t seed,
                   std::uint64_t chain_id, int thin, double modeled_surrogate_cost) {
  KernelConfig kc;
  kc.kind = kind;
  kc.target.dim = 5;
  kc.proposal = ProposalSpec::covariance(proposal_cov);
  kc.surrogate.log_approx = lv_surrogate_logpost(series);
  kc.surrogate.cost_eta = modeled_surrogate_cost;
  kc.estimator.estimate_log = lv_pf_logpost(series, m);
  kc.estimator.cost_per_eval = static_cast<double>(m);
  if (kind == KernelKind::rwm || kind == KernelKind::da)
    throw DomainError("lv_run: exact-target kernels are not available for the LV posterior");

  RunOptions opts;
  opts.n_iter = n_iter;
  opts.burnin = burnin;
  opts.seed = seed;
  opts.chain_id = chain_id;
  opts.thin = thin;
  opts.init = init;

  ChainTrace trace = run_chain(kc, opts);
  LVRunResult res;
  res.counters = trace.counters;
  auto per_coord = diag::ess_per_coordinate(trace.samples);
  res.min_ess = diag::ess_min(per_coord);
  res.wall_seconds = trace.counters.wall_seconds;
  res.mess_per_second = res.wall_seconds > 0.0 ? res.min_ess / res.wall_seconds : 0.0;
  return res;
}

}  // namespace damh::mjp
