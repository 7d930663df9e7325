#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "gordonse/rng.hpp"
#include "gordonse/types.hpp"

namespace gordonse {

/// Observation-model parameters. kappa = n/d is the per-iteration
/// oversampling ratio.
struct ModelSpec {
  ModelKind kind = ModelKind::PhaseRetrieval;
  double sigma = 0.0;  // noise standard deviation
  int d = 0;           // dimension
  int n = 0;           // per-iteration batch size
  std::uint64_t seed = 0;

  double kappa() const { return static_cast<double>(n) / d; }
  void validate() const;
};

/// Unit-norm ground-truth parameter.
struct GroundTruth {
  Eigen::VectorXd theta_star;

  static GroundTruth standard_basis(int d);
  static GroundTruth random(int d, RngStream& rng);
  void validate() const;
};

/// One fresh batch of observations. q holds the +-1 latent labels (empty for
/// phase retrieval); no algorithm reads it, it is kept for diagnostics.
struct Batch {
  Eigen::MatrixXd X;  // n x d, i.i.d. standard Gaussian
  Eigen::VectorXd y;  // length n
  Eigen::VectorXd q;  // length n for mixtures, size 0 otherwise
};

/// Draws a fresh i.i.d. batch from the stream. Consecutive calls on the same
/// stream give independent batches (sample splitting).
Batch sample_batch(const ModelSpec& spec, const GroundTruth& truth,
                   RngStream& rng);

/// scale * u with u uniform on the unit sphere of dimension d.
Eigen::VectorXd random_sphere_init(int d, double scale, RngStream& rng);

/// sqrt(mean(y^2)) * u with u uniform on the unit sphere.
Eigen::VectorXd norm_matched_init(const Batch& batch, RngStream& rng);

/// alpha0 * theta* + sqrt(1 - alpha0^2) * u_perp, with u_perp uniform on the
/// unit sphere of the orthogonal complement; the state is exactly
/// (alpha0, sqrt(1 - alpha0^2)).
Eigen::VectorXd directional_init(const GroundTruth& truth, double alpha0,
                                 RngStream& rng);

}  // namespace gordonse
