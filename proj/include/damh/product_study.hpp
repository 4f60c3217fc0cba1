#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "damh/kernels.hpp"
#include "damh/theory.hpp"

namespace damh::product {

/// Product of standard normals in d dimensions (roughness I = 1).
TargetModel product_normal_target(int d);

struct LogisticSurrogateParams {
  double phi1 = 0.0;  // mode
  double phi2 = 1.0;  // inverse scale, > 0
};

/// Product of logistic densities as the deterministic approximation to the
/// product-normal target.
SurrogateModel logistic_surrogate(int d, const LogisticSurrogateParams& p,
                                  double cost_eta = 0.0);

/// One-dimensional surrogate error s = log(pi_a / pi) with derivatives.
/// Analytic derivatives when available; otherwise central finite differences
/// with step 1e-5.
struct SurrogateError1D {
  std::function<double(double)> s;
  std::function<double(double)> ds;   // may be empty
  std::function<double(double)> d2s;  // may be empty
};

SurrogateError1D logistic_error(const LogisticSurrogateParams& p);

/// Example family: target N(0, 1/L) approximated by N(a, 1/b);
/// beta1 = 1 - b/L, beta2^2 = (1 - b/L)^2 + a^2 b^2 / L.
SurrogateError1D gaussian_approx_error(double a, double b, double L = 1.0);

struct BetasResult {
  theory::ApproxQuality q;
  bool clamped = false;  // |beta1| exceeded beta2 numerically and was clamped
};

/// beta1 = E[s''(X)] / I^2, beta2 = E[s'(X)^2]^{1/2} / I by Gauss-Hermite
/// quadrature (128 nodes, refinement checked to 1e-8). log_target may be
/// empty for a standard normal X; otherwise expectations are self-normalized
/// importance quadrature against the standard normal weight.
BetasResult betas_by_quadrature(const SurrogateError1D& err,
                                const std::function<double(double)>& log_target,
                                double i_const, int nodes = 128);

/// Gaussian additive noise on the exact log-target: W* ~ N(-sigma2/2, sigma2),
/// drawn from the estimator stream. Modeled cost 1/sigma2 (1 for sigma2 = 0).
LikelihoodEstimator synthetic_estimator(const TargetModel& target, double sigma2);

struct StudyConfig {
  std::vector<LogisticSurrogateParams> phis;
  std::vector<double> scalings{2.0};     // multiples of lambda*
  std::vector<double> sigma2s{2.0};      // DAPM noise variances
  std::vector<double> etas{0.01, 0.001, 0.0};
  int d = 10;
  std::int64_t n_iter = 1000000;
  std::int64_t burnin = 0;
  int thin = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  double pm_baseline_sigma2 = 2.0;  // sigma2* of the PM reference runs
};

struct StudyRow {
  KernelKind kind = KernelKind::da;
  double phi1 = 0.0, phi2 = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
  double scaling = 0.0;   // multiple of lambda*
  double lambda = 0.0;    // per-dimension proposal scale
  double mu = 0.0;        // scaling * (2.38 or 2.56)
  double sigma2 = 0.0;    // 0 for DA rows
  double alpha1_hat = 0.0;
  double alpha2given1_hat = 0.0;
  double ess_harm = 0.0;
  double ess_star = 0.0;               // ESS relative to the matched baseline
  std::vector<double> ess_xx;          // ESS** for each eta in config order
  double pred_alpha1 = 0.0;
  double pred_alpha2given1 = 0.0;
  double pred_rel_eff = 0.0;           // eta = 0 theory prediction
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double rwm_alpha1 = 0.0;
  double rwm_ess_harm = 0.0;
  double pm_alpha1 = 0.0;
  double pm_ess_harm = 0.0;
};

/// Full study protocol: baselines (RWM at 2.38/sqrt(d), PM at 2.56/sqrt(d)
/// with sigma2*), then one seeded chain per (phi, scaling[, sigma2]) cell for
/// the DA and DAPM kernels. Cells run concurrently when jobs > 1; assembly
/// order is deterministic.
StudyResult run_logistic_study(const StudyConfig& config);

struct PredictedVsEmpirical {
  double predicted = 0.0;
  double empirical = 0.0;
};

/// (predicted, empirical) pairs for alpha1, alpha2|1 and eta = 0 relative
/// efficiency across the study rows.
struct ComparisonTable {
  std::vector<PredictedVsEmpirical> alpha1;
  std::vector<PredictedVsEmpirical> alpha2given1;
  std::vector<PredictedVsEmpirical> rel_eff;
};

ComparisonTable predicted_vs_empirical(const StudyResult& result);

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace damh::product
