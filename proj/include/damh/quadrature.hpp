#pragma once

#include <functional>
#include <vector>

namespace damh {

/// Gauss-Hermite rule for weight exp(-t^2): integral f(t) e^{-t^2} dt
/// ~ sum w_i f(t_i). Node tables are computed by Golub-Welsch and cached.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  static const GaussHermite& get(int n);
};

/// E[f(Z)] for Z ~ N(0,1) with an n-node Gauss-Hermite rule.
double gh_expect(const std::function<double(double)>& f, int n);

struct AdaptiveResult {
  double value = 0.0;
  int nodes_used = 0;
  double last_delta = 0.0;
  bool converged = false;
};

/// Doubles the node count from n0 until two successive estimates agree to
/// abs_tol (or n_max is hit).
AdaptiveResult gh_expect_adaptive(const std::function<double(double)>& f,
                                  double abs_tol = 1e-8, int n0 = 64,
                                  int n_max = 4096);

/// E[f(Z)] for integrands with known kinks (the accept function min(1, e^u)
/// bends at zero): composite Gauss-Legendre panels over [-range, range] with
/// the kinks as panel boundaries, panel width halved until two estimates
/// agree to abs_tol. Hermite rules stall on such integrands.
AdaptiveResult normal_expect_kinked(const std::function<double(double)>& f,
                                    const std::vector<double>& kinks,
                                    double abs_tol = 1e-8, double range = 12.0,
                                    int max_refine = 9);

}  // namespace damh
