#include "gordonse/iterates.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "gordonse/analysis.hpp"
#include "gordonse/kernels.hpp"

namespace gordonse {

void AlgorithmSpec::validate() const {
  if (first_order() && !(eta > 0.0))
    throw std::invalid_argument("algorithm: eta must be > 0");
}

StatePoint state_of(const Eigen::VectorXd& theta, const GroundTruth& truth) {
  const double a = theta.dot(truth.theta_star);
  const double b = (theta - a * truth.theta_star).norm();
  return {a, b};
}

namespace {

Eigen::VectorXd weights_of(const Eigen::VectorXd& theta, const Batch& batch,
                           Algorithm weight) {
  Eigen::VectorXd x = batch.X * theta;
  Eigen::VectorXd w(x.size());
  kernels::weight_apply(weight, x.data(), batch.y.data(), w.data(),
                        static_cast<std::size_t>(x.size()));
  return w;
}

}  // namespace

Eigen::VectorXd step_higher_order(const Eigen::VectorXd& theta,
                                  const Batch& batch, Algorithm weight) {
  const auto n = batch.X.rows();
  const auto d = batch.X.cols();
  if (n < d)
    throw SolveError("least-squares design has n < d (rank deficient)", 0.0);

  const Eigen::VectorXd w = weights_of(theta, batch, weight);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(batch.X);

  // Condition estimate from the R diagonal; Gaussian designs with n > d are
  // well conditioned, so a degenerate R signals a genuinely bad instance.
  const Eigen::VectorXd rdiag =
      qr.matrixQR().diagonal().head(d).cwiseAbs();
  const double rmax = rdiag.maxCoeff();
  const double rmin = rdiag.minCoeff();
  if (rmin <= 0.0 || rmin / rmax < 1e-13) {
    const double cond = rmin > 0.0 ? rmax / rmin
                                   : std::numeric_limits<double>::infinity();
    throw SolveError(
        "least-squares design numerically singular (cond estimate " +
            std::to_string(cond) + ")",
        cond);
  }
  return qr.solve(w);
}

Eigen::VectorXd step_first_order(const Eigen::VectorXd& theta,
                                 const Batch& batch, Algorithm weight,
                                 double eta) {
  const Eigen::VectorXd w = weights_of(theta, batch, weight);
  const double scale = 2.0 * eta / static_cast<double>(batch.X.rows());
  return theta - scale * (batch.X.transpose() * w);
}

Eigen::VectorXd step(const Eigen::VectorXd& theta, const Batch& batch,
                     const AlgorithmSpec& alg) {
  if (alg.first_order())
    return step_first_order(theta, batch, alg.kind, alg.eta);
  return step_higher_order(theta, batch, alg.kind);
}

TrajectoryRecord run_trajectory(const ModelSpec& model,
                                const AlgorithmSpec& alg,
                                const GroundTruth& truth,
                                const Eigen::VectorXd& theta0, int T,
                                std::uint64_t trial) {
  model.validate();
  alg.validate();
  truth.validate();
  if (T < 1) throw std::invalid_argument("trajectory length T must be >= 1");
  if (theta0.size() != model.d)
    throw std::invalid_argument("theta0 dimension does not match model.d");

  TrajectoryRecord rec;
  rec.model = model;
  rec.alg = alg;
  rec.trial = trial;
  rec.iterations = T;
  rec.points.reserve(static_cast<std::size_t>(T) + 1);

  auto record = [&](Eigen::VectorXd theta) {
    TrajectoryPoint p;
    p.state = state_of(theta, truth);
    p.d_l2 = d_l2(p.state);
    p.d_angle = d_angle(p.state);
    p.theta = std::move(theta);
    rec.points.push_back(std::move(p));
  };

  record(theta0);
  for (int t = 0; t < T; ++t) {
    RngStream rng(model.seed, StreamRole::Batch, trial,
                  static_cast<std::uint64_t>(t));
    const Batch batch = sample_batch(model, truth, rng);
    try {
      record(step(rec.points.back().theta, batch, alg));
    } catch (const SolveError& e) {
      throw SolveError("iteration " + std::to_string(t) + ": " + e.what(),
                       e.cond);
    }
  }
  return rec;
}

}  // namespace gordonse
