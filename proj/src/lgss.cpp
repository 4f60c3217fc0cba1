#include "damh/lgss.hpp"

#include <cmath>

#include "damh/errors.hpp"
#include "damh/math.hpp"
#include "damh/mjp.hpp"

namespace damh::lgss {

namespace {

double log_mvn(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
               const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("lgss: covariance not SPD");
  Eigen::VectorXd r = llt.matrixL().solve(y - mean);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * r.squaredNorm() - 0.5 * logdet -
         0.5 * cov.rows() * 2.0 * kLogSqrt2Pi;
}

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                         SplitRng& rng, Stream stream) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal(stream);
  return mean + Eigen::MatrixXd(llt.matrixL()) * z;
}

}  // namespace

double kalman_loglik(const Model& m, const std::vector<Eigen::VectorXd>& ys) {
  Eigen::VectorXd a = m.x0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m.x0.size(), m.x0.size());
  double loglik = 0.0;
  for (const auto& y : ys) {
    Eigen::VectorXd z = m.A * a + m.b;
    Eigen::MatrixXd V = m.A * C * m.A.transpose() + m.Q;
    Eigen::VectorXd yhat = m.H * z;
    Eigen::MatrixXd S = m.H * V * m.H.transpose() + m.R;
    loglik += log_mvn(y, yhat, S);
    Eigen::MatrixXd K = V * m.H.transpose() * S.inverse();
    a = z + K * (y - yhat);
    C = V - K * m.H * V;
    C = 0.5 * (C + C.transpose()).eval();
  }
  return loglik;
}

std::vector<Eigen::VectorXd> simulate(const Model& m, int T, SplitRng& rng) {
  std::vector<Eigen::VectorXd> ys;
  Eigen::VectorXd x = m.x0;
  for (int t = 0; t < T; ++t) {
    x = draw_mvn(m.A * x + m.b, m.Q, rng, Stream::data);
    ys.push_back(draw_mvn(m.H * x, m.R, rng, Stream::data));
  }
  return ys;
}

double pf_loglik(const Model& m, const std::vector<Eigen::VectorXd>& ys, int n_particles,
                 SplitRng& rng) {
  std::vector<Eigen::VectorXd> particles(n_particles, m.x0);
  std::function<void(Eigen::VectorXd&, SplitRng&)> propagate =
      [&m](Eigen::VectorXd& x, SplitRng& r) {
        x = draw_mvn(m.A * x + m.b, m.Q, r, Stream::estimator);
      };
  std::function<double(const Eigen::VectorXd&, int)> log_weight =
      [&m, &ys](const Eigen::VectorXd& x, int t) {
        return log_mvn(ys[t], m.H * x, m.R);
      };
  return mjp::bootstrap_pf_core<Eigen::VectorXd>(particles, propagate, log_weight, 0,
                                                 static_cast<int>(ys.size()), rng);
}

}  // namespace damh::lgss
