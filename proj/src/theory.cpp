#include "damh/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "damh/math.hpp"
#include "damh/quadrature.hpp"

namespace damh::theory {

namespace {
constexpr double kBetaSlack = 1e-9;
constexpr double kQuadTol = 1e-8;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite argument " << name << " = " << v;
    throw DomainError(os.str());
  }
}
}  // namespace

ApproxQuality::ApproxQuality(double b1, double b2) : beta1(b1), beta2(b2) {
  require_finite(b1, "beta1");
  require_finite(b2, "beta2");
  if (b2 < 0.0) throw DomainError("ApproxQuality: beta2 must be >= 0");
  if (std::abs(b1) > b2 + kBetaSlack)
    throw DomainError("ApproxQuality: |beta1| <= beta2 violated");
}

TuningPoint::TuningPoint(double mu_, double sigma2_, double eta_)
    : mu(mu_), sigma2(sigma2_), eta(eta_) {
  require_finite(mu_, "mu");
  require_finite(sigma2_, "sigma2");
  require_finite(eta_, "eta");
  if (mu_ < 0.0 || sigma2_ < 0.0 || eta_ < 0.0)
    throw DomainError("TuningPoint: fields must be non-negative");
}

double gauss_g(double m, double v) {
  require_finite(m, "m");
  require_finite(v, "v");
  if (v < 0.0) throw DomainError("gauss_g: v must be >= 0");
  if (v == 0.0) return m >= 0.0 ? 1.0 : std::exp(m);
  const double s = std::sqrt(v);
  const double t1 = norm_cdf(m / s);
  const double log_arg = m + 0.5 * v;
  double t2;
  if (log_arg > 700.0) {
    // exp would overflow; the Phi factor is astronomically small, so work in
    // log space (Mills-ratio asymptotics inside log_norm_cdf).
    t2 = std::exp(log_arg + log_norm_cdf(-s - m / s));
  } else {
    t2 = std::exp(log_arg) * norm_cdf(-s - m / s);
  }
  return std::min(1.0, t1 + t2);
}

double alpha1(double mu, const ApproxQuality& q) {
  if (mu < 0.0) throw DomainError("alpha1: mu must be >= 0");
  const double m = -0.5 * mu * mu * (1.0 - q.beta1);
  const double v = mu * mu * (1.0 + q.beta2 * q.beta2 - 2.0 * q.beta1);
  return gauss_g(m, std::max(v, 0.0));
}

namespace {

// One-dimensional integrand of eq. (alpha12): conditioning the limiting
// Gaussian pair (Q, S) on S's driving noise xi leaves a product of two G
// terms. exact_second selects the sigma2 -> 0 limit where the second factor
// is min(1, exp(.)). Degenerate factors reduce G to the kinked accept
// function; those integrals go through the kink-splitting panel rule since
// Hermite quadrature cannot reach the required tolerance across a bend.
double alpha12_quad(double mu, double sigma2, const ApproxQuality& q,
                    bool exact_second) {
  const double b1 = q.beta1, b2 = q.beta2;
  if (b2 == 0.0) {
    // S degenerate at 0: Stage One is noise-free RWM, Stage Two pure noise.
    double first = gauss_g(-0.5 * mu * mu, mu * mu);
    double second = exact_second || sigma2 == 0.0
                        ? 1.0
                        : gauss_g(-sigma2, 2.0 * sigma2);
    return first * second;
  }
  if (mu == 0.0)
    return exact_second || sigma2 == 0.0 ? 1.0 : gauss_g(-sigma2, 2.0 * sigma2);

  const double ratio = b1 / b2;
  const double vq = mu * mu * std::max(0.0, 1.0 - ratio * ratio);
  const bool second_exact = exact_second || sigma2 == 0.0;
  auto integrand = [&](double xi) {
    const double a = -0.5 * (1.0 - b1) * mu * mu + mu * (b2 - ratio) * xi;
    const double b = -sigma2 - 0.5 * mu * mu * b1 - mu * b2 * xi;
    const double first = gauss_g(a, vq);
    const double second = second_exact ? mh_accept_fn(b) : gauss_g(b, 2.0 * sigma2);
    return first * second;
  };

  // transition centres of the two factors: exact kinks when a factor is
  // degenerate, steep shoulders when its variance is merely small
  std::vector<double> centres;
  centres.push_back(-(sigma2 + 0.5 * mu * mu * b1) / (mu * b2));
  {
    const double slope = mu * (b2 - ratio);
    if (slope != 0.0) centres.push_back(0.5 * (1.0 - b1) * mu * mu / slope);
  }
  const bool kinked = second_exact || vq == 0.0;

  AdaptiveResult res;
  if (!kinked) {
    res = gh_expect_adaptive(integrand, kQuadTol, 64, 4096);
    // steep-but-smooth integrands (tiny sigma2 or vq) stall the Hermite rule
    if (!res.converged) res = normal_expect_kinked(integrand, centres, kQuadTol);
  } else {
    res = normal_expect_kinked(integrand, centres, kQuadTol);
  }
  if (!res.converged) {
    std::ostringstream os;
    os << "alpha12 quadrature did not converge (mu=" << mu << ", sigma2=" << sigma2
       << ", beta1=" << b1 << ", beta2=" << b2 << ", nodes=" << res.nodes_used
       << ", last_delta=" << res.last_delta << ")";
    throw NumericError(os.str());
  }
  return std::clamp(res.value, 0.0, 1.0);
}

}  // namespace

double alpha12(double mu, double sigma2, const ApproxQuality& q) {
  if (mu < 0.0 || sigma2 < 0.0) throw DomainError("alpha12: need mu, sigma2 >= 0");
  return alpha12_quad(mu, sigma2, q, /*exact_second=*/false);
}

double alpha12_da(double mu, const ApproxQuality& q) {
  if (mu < 0.0) throw DomainError("alpha12_da: need mu >= 0");
  return alpha12_quad(mu, 0.0, q, /*exact_second=*/true);
}

double stage2_factor_bound(double mu, double sigma2, const ApproxQuality& q) {
  const double b1 = q.beta1, b2 = q.beta2;
  if (b2 == 0.0 || mu == 0.0)
    return sigma2 == 0.0 ? 1.0 : gauss_g(-sigma2, 2.0 * sigma2);
  auto integrand = [&](double xi) {
    const double b = -sigma2 - 0.5 * mu * mu * b1 - mu * b2 * xi;
    return sigma2 == 0.0 ? mh_accept_fn(b) : gauss_g(b, 2.0 * sigma2);
  };
  std::vector<double> centres{-(sigma2 + 0.5 * mu * mu * b1) / (mu * b2)};
  if (sigma2 == 0.0) return normal_expect_kinked(integrand, centres, kQuadTol).value;
  AdaptiveResult res = gh_expect_adaptive(integrand, kQuadTol, 64, 4096);
  if (!res.converged) res = normal_expect_kinked(integrand, centres, kQuadTol);
  return res.value;
}

double eff_dapm(const TuningPoint& t, const ApproxQuality& q) {
  if (t.mu == 0.0) return 0.0;
  const double a1 = alpha1(t.mu, q);
  const double a12 = alpha12(t.mu, t.sigma2, q);
  return t.mu * t.mu * t.sigma2 * a12 / (t.eta * t.sigma2 + a1);
}

double eff_da(double mu, const ApproxQuality& q, double eta) {
  if (mu == 0.0) return 0.0;
  const double a1 = alpha1(mu, q);
  const double a12 = alpha12_da(mu, q);
  return mu * mu * a12 / (eta + a1);
}

double eff_pm(double mu, double sigma2) {
  return 2.0 * mu * mu * sigma2 * norm_cdf(-0.5 * std::sqrt(mu * mu + 2.0 * sigma2));
}

double eff_rwm(double mu) { return 2.0 * mu * mu * norm_cdf(-0.5 * mu); }

namespace {

// Deterministic Nelder-Mead (standard reflection/expansion/contraction
// coefficients, fixed iteration budget).
template <int N, class F>
std::array<double, N> nelder_mead(const F& f, std::array<double, N> x0,
                                  double step, int max_iter = 400) {
  constexpr int M = N + 1;
  std::array<std::array<double, N>, M> simplex;
  std::array<double, M> fv;
  for (int i = 0; i < M; ++i) {
    simplex[i] = x0;
    if (i > 0) simplex[i][i - 1] += step;
    fv[i] = f(simplex[i]);
  }
  std::array<int, M> order;
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < M; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    if (std::abs(fv[order[M - 1]] - fv[order[0]]) < 1e-13) break;
    std::array<double, N> centroid{};
    for (int i = 0; i < M - 1; ++i)
      for (int d = 0; d < N; ++d) centroid[d] += simplex[order[i]][d] / (M - 1);
    const int worst = order[M - 1];
    auto affine = [&](double c) {
      std::array<double, N> p;
      for (int d = 0; d < N; ++d) p[d] = centroid[d] + c * (simplex[worst][d] - centroid[d]);
      return p;
    };
    auto refl = affine(-1.0);
    double fr = f(refl);
    if (fr < fv[order[0]]) {
      auto exp_p = affine(-2.0);
      double fe = f(exp_p);
      if (fe < fr) { simplex[worst] = exp_p; fv[worst] = fe; }
      else { simplex[worst] = refl; fv[worst] = fr; }
    } else if (fr < fv[order[M - 2]]) {
      simplex[worst] = refl;
      fv[worst] = fr;
    } else {
      auto con = affine(0.5);
      double fc = f(con);
      if (fc < fv[worst]) { simplex[worst] = con; fv[worst] = fc; }
      else {
        for (int i = 1; i < M; ++i) {
          int idx = order[i];
          for (int d = 0; d < N; ++d)
            simplex[idx][d] = simplex[order[0]][d] + 0.5 * (simplex[idx][d] - simplex[order[0]][d]);
          fv[idx] = f(simplex[idx]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < M; ++i)
    if (fv[i] < fv[best]) best = i;
  return simplex[best];
}

std::vector<double> spaced(double lo, double hi, int n, bool log_spaced) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    v[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  return v;
}

Baseline optimize_pm_baseline() {
  const GridSpec g;
  auto mus = spaced(g.mu_lo, g.mu_hi, g.mu_n, true);
  auto s2s = spaced(g.sigma2_lo, g.sigma2_hi, g.sigma2_n, true);
  double best = -1.0;
  std::array<double, 2> bx{2.5, 3.0};
  for (double mu : mus)
    for (double s2 : s2s) {
      double e = eff_pm(mu, s2);
      if (e > best) { best = e; bx = {mu, s2}; }
    }
  auto neg = [](const std::array<double, 2>& p) {
    if (p[0] <= 0.0 || p[1] <= 0.0) return 1e300;
    return -eff_pm(p[0], p[1]);
  };
  auto opt = nelder_mead<2>(neg, bx, 0.05 * bx[0]);
  return {opt[0], opt[1], eff_pm(opt[0], opt[1])};
}

Baseline optimize_rwm_baseline() {
  auto mus = spaced(0.05, 12.0, 240, false);
  double best = -1.0, bmu = 2.4;
  for (double mu : mus) {
    double e = eff_rwm(mu);
    if (e > best) { best = e; bmu = mu; }
  }
  auto neg = [](const std::array<double, 1>& p) {
    return p[0] <= 0.0 ? 1e300 : -eff_rwm(p[0]);
  };
  auto opt = nelder_mead<1>(neg, {bmu}, 0.05);
  return {opt[0], 0.0, eff_rwm(opt[0])};
}

}  // namespace

const Baseline& pm_baseline() {
  static const Baseline b = optimize_pm_baseline();
  return b;
}

const Baseline& rwm_baseline() {
  static const Baseline b = optimize_rwm_baseline();
  return b;
}

double eff_rel(const TuningPoint& t, const ApproxQuality& q, Mode mode) {
  return mode == Mode::dapm ? eff_dapm(t, q) / pm_baseline().eff
                            : eff_da(t.mu, q, t.eta) / rwm_baseline().eff;
}

EfficiencyPoint evaluate(const TuningPoint& t, const ApproxQuality& q, Mode mode) {
  EfficiencyPoint p;
  p.tuning = t;
  p.alpha1 = alpha1(t.mu, q);
  p.alpha12 = mode == Mode::dapm ? alpha12(t.mu, t.sigma2, q) : alpha12_da(t.mu, q);
  p.alpha2given1 = p.alpha1 > 0.0 ? p.alpha12 / p.alpha1 : 1.0;
  p.eff = mode == Mode::dapm ? eff_dapm(t, q) : eff_da(t.mu, q, t.eta);
  p.eff_rel = mode == Mode::dapm ? p.eff / pm_baseline().eff : p.eff / rwm_baseline().eff;
  return p;
}

OptimizeResult optimize(const ApproxQuality& q, double eta, Mode mode) {
  if (eta < 0.0) throw DomainError("optimize: eta must be >= 0");
  const GridSpec g;
  auto mus = spaced(g.mu_lo, g.mu_hi, g.mu_n, g.log_spaced);
  OptimizeResult out;
  if (mode == Mode::dapm) {
    auto s2s = spaced(g.sigma2_lo, g.sigma2_hi, g.sigma2_n, g.log_spaced);
    double best = -1.0;
    int bi = 0, bj = 0;
    for (int i = 0; i < g.mu_n; ++i)
      for (int j = 0; j < g.sigma2_n; ++j) {
        double e = eff_dapm(TuningPoint(mus[i], s2s[j], eta), q);
        if (e > best) { best = e; bi = i; bj = j; }
      }
    // cell sizes are locally geometric; 5% of the value is a stable proxy
    double step_mu = 0.05 * mus[bi], step_s2 = 0.05 * s2s[bj];
    auto neg = [&](const std::array<double, 2>& p) {
      if (p[0] <= 0.0 || p[1] <= 0.0) return 1e300;
      return -eff_dapm(TuningPoint(p[0], p[1], eta), q);
    };
    auto opt = nelder_mead<2>(neg, {mus[bi], s2s[bj]}, std::max(step_mu, step_s2));
    out.tuning = TuningPoint(opt[0], opt[1], eta);
    out.boundary_warning = bi == 0 || bi == g.mu_n - 1 || bj == 0 || bj == g.sigma2_n - 1 ||
                           opt[0] <= g.mu_lo || opt[0] >= g.mu_hi ||
                           opt[1] <= g.sigma2_lo || opt[1] >= g.sigma2_hi;
  } else {
    double best = -1.0;
    int bi = 0;
    for (int i = 0; i < g.mu_n; ++i) {
      double e = eff_da(mus[i], q, eta);
      if (e > best) { best = e; bi = i; }
    }
    auto neg = [&](const std::array<double, 1>& p) {
      return p[0] <= 0.0 ? 1e300 : -eff_da(p[0], q, eta);
    };
    auto opt = nelder_mead<1>(neg, {mus[bi]}, 0.05 * mus[bi]);
    out.tuning = TuningPoint(opt[0], 0.0, eta);
    out.boundary_warning = bi == 0 || bi == g.mu_n - 1 || opt[0] <= g.mu_lo || opt[0] >= g.mu_hi;
  }
  out.point = evaluate(out.tuning, q, mode);
  return out;
}

double esjd_limit(double mu, double sigma2, const ApproxQuality& q, double i_const) {
  if (i_const <= 0.0) throw DomainError("esjd_limit: i_const must be > 0");
  const double a12 = sigma2 == 0.0 ? alpha12_da(mu, q) : alpha12(mu, sigma2, q);
  return a12 * (mu / i_const) * (mu / i_const);
}

std::vector<EfficiencyPoint> grid_scan(const ApproxQuality& q, double eta,
                                       Mode mode, const GridSpec& grid) {
  auto mus = spaced(grid.mu_lo, grid.mu_hi, grid.mu_n, grid.log_spaced);
  std::vector<EfficiencyPoint> rows;
  if (mode == Mode::dapm) {
    auto s2s = spaced(grid.sigma2_lo, grid.sigma2_hi, grid.sigma2_n, grid.log_spaced);
    rows.reserve(mus.size() * s2s.size());
    for (double mu : mus)
      for (double s2 : s2s) rows.push_back(evaluate(TuningPoint(mu, s2, eta), q, mode));
  } else {
    rows.reserve(mus.size());
    for (double mu : mus) rows.push_back(evaluate(TuningPoint(mu, 0.0, eta), q, mode));
  }
  return rows;
}

double optimal_mu_at_sigma2(double sigma2, const ApproxQuality& q, double eta) {
  auto mus = spaced(0.05, 12.0, 240, true);
  double best = -1.0, bmu = mus[0];
  for (double mu : mus) {
    double e = eff_dapm(TuningPoint(mu, sigma2, eta), q);
    if (e > best) { best = e; bmu = mu; }
  }
  auto neg = [&](const std::array<double, 1>& p) {
    return p[0] <= 0.0 ? 1e300 : -eff_dapm(TuningPoint(p[0], sigma2, eta), q);
  };
  return nelder_mead<1>(neg, {bmu}, 0.05 * bmu)[0];
}

}  // namespace damh::theory
