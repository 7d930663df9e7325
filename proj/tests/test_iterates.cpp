#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gordonse/analysis.hpp"
#include "gordonse/iterates.hpp"
#include "gordonse/state_evolution.hpp"

using namespace gordonse;

namespace {

Batch make_batch(Algorithm alg, const ModelSpec& spec, const GroundTruth& t,
                 std::uint64_t seed, std::uint64_t iter = 0) {
  (void)alg;
  RngStream rng(seed, StreamRole::Batch, 0, iter);
  return sample_batch(spec, t, rng);
}

}  // namespace

TEST_CASE("state_of") {
  const GroundTruth truth = GroundTruth::standard_basis(5);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
  v[1] = 1.0;

  const StatePoint s1 = state_of(truth.theta_star, truth);
  CHECK(s1.alpha == 1.0);
  CHECK(s1.beta == 0.0);

  const StatePoint s2 = state_of(-truth.theta_star, truth);
  CHECK(s2.alpha == -1.0);
  CHECK(s2.beta == 0.0);

  const StatePoint s3 = state_of(0.3 * truth.theta_star + 0.4 * v, truth);
  CHECK(s3.alpha == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(s3.beta == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("all four updates fix the truth on noiseless data") {
  const int d = 60, n = 600;
  const GroundTruth truth = GroundTruth::standard_basis(d);
  for (Algorithm alg : kAllAlgorithms) {
    const ModelSpec spec{model_of(alg), 0.0, d, n, 5};
    const Batch b = make_batch(alg, spec, truth, 5);
    const Eigen::VectorXd next =
        step(truth.theta_star, b, AlgorithmSpec{alg, 0.5});
    CHECK((next - truth.theta_star).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("first-order updates fix the truth exactly") {
  const int d = 20, n = 200;
  const GroundTruth truth = GroundTruth::standard_basis(d);
  for (Algorithm alg : {Algorithm::GdPr, Algorithm::SubgradAmMlr}) {
    const ModelSpec spec{model_of(alg), 0.0, d, n, 6};
    const Batch b = make_batch(alg, spec, truth, 6);
    for (double eta : {0.2, 0.5, 0.95}) {
      const Eigen::VectorXd next =
          step_first_order(truth.theta_star, b, alg, eta);
      CHECK((next - truth.theta_star).norm() == 0.0);
    }
  }
}

TEST_CASE("sign equivariance of the one-step operators") {
  const int d = 30, n = 300;
  const GroundTruth truth = GroundTruth::standard_basis(d);
  RngStream rng(8, StreamRole::Init);
  const Eigen::VectorXd theta = random_sphere_init(d, 0.9, rng);
  for (Algorithm alg : kAllAlgorithms) {
    const ModelSpec spec{model_of(alg), 0.1, d, n, 8};
    const Batch b = make_batch(alg, spec, truth, 8);
    const AlgorithmSpec as{alg, 0.5};
    const Eigen::VectorXd plus = step(theta, b, as);
    const Eigen::VectorXd minus = step(-theta, b, as);
    CHECK((plus + minus).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("least-squares step agrees with an independent solver") {
  // The square-root loss and the squared loss share their minimizer; compare
  // the QR path against a rank-revealing solve of the same normal problem.
  const int d = 25, n = 250;
  const GroundTruth truth = GroundTruth::standard_basis(d);
  const ModelSpec spec{ModelKind::PhaseRetrieval, 0.2, d, n, 9};
  const Batch b = make_batch(Algorithm::AmPr, spec, truth, 9);
  RngStream rng(9, StreamRole::Init);
  const Eigen::VectorXd theta = random_sphere_init(d, 1.1, rng);

  const Eigen::VectorXd qr_result = step_higher_order(theta, b, Algorithm::AmPr);

  Eigen::VectorXd x = b.X * theta;
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i)
    w[i] = (x[i] >= 0 ? 1.0 : -1.0) * b.y[i];
  const Eigen::VectorXd svd_result =
      b.X.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(w);
  CHECK((qr_result - svd_result).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("rank-deficient designs are rejected with a condition estimate") {
  const GroundTruth truth = GroundTruth::standard_basis(10);
  Batch b;
  b.X = Eigen::MatrixXd::Random(5, 10);  // n < d
  b.y = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(step_higher_order(truth.theta_star, b, Algorithm::AmPr),
                  SolveError);

  Batch degenerate;
  degenerate.X = Eigen::MatrixXd::Zero(20, 3);
  degenerate.X.col(0).setOnes();
  degenerate.X.col(1).setOnes();  // exactly dependent columns
  degenerate.X.col(2).setLinSpaced(20, 0.0, 1.0);
  degenerate.y = Eigen::VectorXd::Ones(20);
  const GroundTruth t3 = GroundTruth::standard_basis(3);
  CHECK_THROWS_AS(step_higher_order(t3.theta_star, degenerate, Algorithm::AmPr),
                  SolveError);
}

TEST_CASE("run_trajectory bookkeeping") {
  const ModelSpec spec{ModelKind::PhaseRetrieval, 0.0, 12, 120, 10};
  const AlgorithmSpec alg{Algorithm::AmPr, 0.5};
  const GroundTruth truth = GroundTruth::standard_basis(12);

  CHECK_THROWS(run_trajectory(spec, alg, truth, truth.theta_star, 0));

  const TrajectoryRecord one =
      run_trajectory(spec, alg, truth, truth.theta_star, 1);
  CHECK(one.points.size() == 2);

  // sigma = 0 from the truth: constant trajectory for all four updates.
  for (Algorithm a : kAllAlgorithms) {
    const ModelSpec s2{model_of(a), 0.0, 12, 120, 11};
    const TrajectoryRecord r =
        run_trajectory(s2, {a, 0.5}, truth, truth.theta_star, 4);
    for (const auto& p : r.points) CHECK(p.d_l2 <= 1e-9);
  }
}

TEST_CASE("recorded state matches a recomputation from theta") {
  const ModelSpec spec{ModelKind::MixtureOfRegressions, 0.1, 15, 150, 12};
  const GroundTruth truth = GroundTruth::standard_basis(15);
  RngStream rng(12, StreamRole::Init);
  const Eigen::VectorXd theta0 = directional_init(truth, 0.5, rng);
  const TrajectoryRecord r =
      run_trajectory(spec, {Algorithm::AmMlr, 0.5}, truth, theta0, 5);
  for (const auto& p : r.points) {
    const StatePoint re = state_of(p.theta, truth);
    CHECK(std::fabs(re.alpha - p.state.alpha) <= 1e-10);
    CHECK(std::fabs(re.beta - p.state.beta) <= 1e-10);
    CHECK(p.state.beta >= 0.0);
  }
}

TEST_CASE("deterministic replay is bit-identical") {
  const ModelSpec spec{ModelKind::PhaseRetrieval, 0.05, 20, 200, 13};
  const GroundTruth truth = GroundTruth::standard_basis(20);
  RngStream rng(13, StreamRole::Init);
  const Eigen::VectorXd theta0 = directional_init(truth, 0.4, rng);
  const TrajectoryRecord a =
      run_trajectory(spec, {Algorithm::GdPr, 0.5}, truth, theta0, 6, 3);
  const TrajectoryRecord b =
      run_trajectory(spec, {Algorithm::GdPr, 0.5}, truth, theta0, 6, 3);
  for (std::size_t t = 0; t < a.points.size(); ++t)
    CHECK((a.points[t].theta - b.points[t].theta).norm() == 0.0);

  // A different trial index gives a different data stream.
  const TrajectoryRecord c =
      run_trajectory(spec, {Algorithm::GdPr, 0.5}, truth, theta0, 6, 4);
  CHECK((a.points.back().theta - c.points.back().theta).norm() > 0.0);
}

TEST_CASE("alternating minimization converges from a weak start") {
  // Desk-scale version of the reference run (kappa = 20 preserved): the
  // error should fall below 1e-6 by iteration 10 in at least 95% of trials.
  const int d = 150, n = 3000, trials = 40;
  const ModelSpec spec{ModelKind::PhaseRetrieval, 1e-8, d, n, 14};
  const GroundTruth truth = GroundTruth::standard_basis(d);
  RngStream rng(14, StreamRole::Init);
  const Eigen::VectorXd theta0 = directional_init(truth, 0.2, rng);
  int ok = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const TrajectoryRecord r =
        run_trajectory(spec, {Algorithm::AmPr, 0.5}, truth, theta0, 10, trial);
    if (r.points[10].d_l2 < 1e-6) ++ok;
  }
  CHECK(ok >= static_cast<int>(0.95 * trials));
}
