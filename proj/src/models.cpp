#include "gordonse/models.hpp"

#include <cmath>
#include <span>
#include <stdexcept>

namespace gordonse {

void ModelSpec::validate() const {
  if (d < 1) throw std::invalid_argument("model: d must be >= 1");
  if (n < 1) throw std::invalid_argument("model: n must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("model: sigma must be >= 0");
}

GroundTruth GroundTruth::standard_basis(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
  t[0] = 1.0;
  return {std::move(t)};
}

GroundTruth GroundTruth::random(int d, RngStream& rng) {
  return {random_sphere_init(d, 1.0, rng)};
}

void GroundTruth::validate() const {
  if (theta_star.size() < 1)
    throw std::invalid_argument("ground truth is empty");
  if (std::fabs(theta_star.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("ground truth must have unit norm");
}

Batch sample_batch(const ModelSpec& spec, const GroundTruth& truth,
                   RngStream& rng) {
  Batch b;
  b.X.resize(spec.n, spec.d);
  rng.fill_normal({b.X.data(), static_cast<std::size_t>(b.X.size())});
  Eigen::VectorXd t = b.X * truth.theta_star;

  Eigen::VectorXd noise(spec.n);
  rng.fill_normal({noise.data(), static_cast<std::size_t>(spec.n)});

  if (spec.kind == ModelKind::PhaseRetrieval) {
    b.y = t.cwiseAbs() + spec.sigma * noise;
  } else {
    b.q.resize(spec.n);
    rng.fill_rademacher({b.q.data(), static_cast<std::size_t>(spec.n)});
    b.y = b.q.cwiseProduct(t) + spec.sigma * noise;
  }
  return b;
}

Eigen::VectorXd random_sphere_init(int d, double scale, RngStream& rng) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
  Eigen::VectorXd v(d);
  double norm = 0.0;
  do {
    rng.fill_normal({v.data(), static_cast<std::size_t>(d)});
    norm = v.norm();
  } while (norm == 0.0);
  return (scale / norm) * v;
}

Eigen::VectorXd norm_matched_init(const Batch& batch, RngStream& rng) {
  if (batch.y.size() < 1) throw std::invalid_argument("batch is empty");
  const double scale = std::sqrt(batch.y.squaredNorm() / batch.y.size());
  const int d = static_cast<int>(batch.X.cols());
  if (scale == 0.0) return Eigen::VectorXd::Zero(d);
  return random_sphere_init(d, scale, rng);
}

Eigen::VectorXd directional_init(const GroundTruth& truth, double alpha0,
                                 RngStream& rng) {
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0))
    throw std::invalid_argument("alpha0 must lie in [0, 1]");
  const int d = static_cast<int>(truth.theta_star.size());
  if (alpha0 == 1.0) return truth.theta_star;
  Eigen::VectorXd perp;
  double norm = 0.0;
  do {
    Eigen::VectorXd g = random_sphere_init(d, 1.0, rng);
    perp = g - g.dot(truth.theta_star) * truth.theta_star;
    norm = perp.norm();
  } while (norm == 0.0);
  return alpha0 * truth.theta_star +
         std::sqrt(1.0 - alpha0 * alpha0) / norm * perp;
}

}  // namespace gordonse
