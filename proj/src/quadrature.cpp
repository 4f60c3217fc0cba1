#include "damh/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "damh/errors.hpp"
#include "damh/math.hpp"

namespace damh {

namespace {

GaussHermite compute_rule(int n) {
  // Golub-Welsch: Jacobi matrix for physicists' Hermite polynomials has zero
  // diagonal and off-diagonal sqrt(k/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) throw NumericError("gauss-hermite eigensolve failed");
  GaussHermite rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(M_PI);  // integral of exp(-t^2)
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

const GaussHermite& GaussHermite::get(int n) {
  if (n < 1) throw DomainError("gauss-hermite: need n >= 1");
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double gh_expect(const std::function<double(double)>& f, int n) {
  const GaussHermite& rule = GaussHermite::get(n);
  // E[f(Z)] = (1/sqrt(pi)) sum w_i f(sqrt(2) t_i)
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(kSqrt2 * rule.nodes[i]);
  return acc / std::sqrt(M_PI);
}

AdaptiveResult gh_expect_adaptive(const std::function<double(double)>& f,
                                  double abs_tol, int n0, int n_max) {
  AdaptiveResult res;
  double prev = gh_expect(f, n0);
  for (int n = 2 * n0; n <= n_max; n *= 2) {
    double cur = gh_expect(f, n);
    res.value = cur;
    res.nodes_used = n;
    res.last_delta = std::abs(cur - prev);
    if (res.last_delta < abs_tol) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

namespace {

// 15-point Gauss-Legendre on [-1, 1] by the same Golub-Welsch construction.
const GaussHermite& legendre15() {
  static const GaussHermite rule = [] {
    const int n = 15;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      double b = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GaussHermite r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      r.nodes[i] = es.eigenvalues()(i);
      double v0 = es.eigenvectors()(0, i);
      r.weights[i] = 2.0 * v0 * v0;
    }
    return r;
  }();
  return rule;
}

}  // namespace

AdaptiveResult normal_expect_kinked(const std::function<double(double)>& f,
                                    const std::vector<double>& kinks,
                                    double abs_tol, double range, int max_refine) {
  std::vector<double> bounds{-range, range};
  for (double k : kinks)
    if (std::isfinite(k) && std::abs(k) < range) bounds.push_back(k);
  std::sort(bounds.begin(), bounds.end());

  const GaussHermite& gl = legendre15();
  auto integrate = [&](double width) {
    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
      const double lo = bounds[seg], hi = bounds[seg + 1];
      const int n_panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
      const double h = (hi - lo) / n_panels;
      for (int p = 0; p < n_panels; ++p) {
        const double a = lo + p * h;
        const double mid = a + 0.5 * h, half = 0.5 * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
          const double x = mid + half * gl.nodes[i];
          acc += gl.weights[i] * f(x) * norm_pdf(x);
        }
        total += acc * half;
      }
    }
    return total;
  };

  AdaptiveResult res;
  double width = 1.0;
  double prev = integrate(width);
  int panels = static_cast<int>(2.0 * range / width);
  for (int r = 0; r < max_refine; ++r) {
    width *= 0.5;
    panels *= 2;
    double cur = integrate(width);
    res.value = cur;
    res.nodes_used = panels * static_cast<int>(gl.nodes.size());
    res.last_delta = std::abs(cur - prev);
    if (res.last_delta < abs_tol) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

}  // namespace damh
