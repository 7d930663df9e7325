#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "gordonse/models.hpp"
#include "gordonse/types.hpp"

namespace gordonse {

/// One of the four updates plus the stepsize for first-order kinds.
struct AlgorithmSpec {
  Algorithm kind = Algorithm::AmPr;
  double eta = 0.5;

  bool first_order() const { return order_of(kind) == UpdateOrder::FirstOrder; }
  void validate() const;
};

/// Thrown when the least-squares design is rank deficient; carries a
/// condition estimate from the R factor.
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& what, double cond_estimate)
      : std::runtime_error(what), cond(cond_estimate) {}
  double cond;
};

/// (⟨theta, theta*⟩, ||theta - ⟨theta, theta*⟩ theta*||).
StatePoint state_of(const Eigen::VectorXd& theta, const GroundTruth& truth);

/// Least-squares step: argmin over theta' of sum_i (omega(<x_i, theta>, y_i)
/// - <x_i, theta'>)^2, solved by a Householder QR of X.
Eigen::VectorXd step_higher_order(const Eigen::VectorXd& theta,
                                  const Batch& batch, Algorithm weight);

/// theta - (2 eta / n) * sum_i omega(<x_i, theta>, y_i) x_i.
Eigen::VectorXd step_first_order(const Eigen::VectorXd& theta,
                                 const Batch& batch, Algorithm weight,
                                 double eta);

/// Applies the spec's update once (dispatching on the order of the kind).
Eigen::VectorXd step(const Eigen::VectorXd& theta, const Batch& batch,
                     const AlgorithmSpec& alg);

struct TrajectoryPoint {
  Eigen::VectorXd theta;
  StatePoint state;
  double d_l2 = 0.0;
  double d_angle = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectoryPoint> points;  // length T + 1 (initial + T steps)
  ModelSpec model;
  AlgorithmSpec alg;
  std::uint64_t trial = 0;
  int iterations = 0;
};

/// Runs T iterations with sample splitting: a fresh batch is drawn for every
/// iteration from a stream keyed by (model.seed, trial, iteration), so trials
/// parallelize without shared state and replays are bit-identical.
TrajectoryRecord run_trajectory(const ModelSpec& model,
                                const AlgorithmSpec& alg,
                                const GroundTruth& truth,
                                const Eigen::VectorXd& theta0, int T,
                                std::uint64_t trial = 0);

}  // namespace gordonse
