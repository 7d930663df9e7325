#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gordonse/scalarized_ao.hpp"
#include "gordonse/state_evolution.hpp"

using namespace gordonse;

TEST_CASE("closed-form minimizer agrees with the numeric one") {
  for (int k = 0; k < 10; ++k) {
    RngStream rng(100 + k, StreamRole::AoInstance, k);
    const AOInstance inst =
        make_ao_instance(Algorithm::AmPr, {0.6, 0.8}, 0.1, 2000, 200, rng);
    const HoMinimizerResult closed = ho_minimizer(inst);
    const ExpandedState numeric = numeric_3var_check(inst);
    CHECK(std::fabs(closed.xi.alpha - numeric.alpha) <= 1e-6);
    CHECK(std::fabs(closed.xi.mu - numeric.mu) <= 1e-6);
    CHECK(std::fabs(closed.xi.nu - numeric.nu) <= 1e-6);
    CHECK_FALSE(closed.negative_loss_warning);
  }
}

TEST_CASE("zero direction vector reduces to plain least squares") {
  RngStream rng(7, StreamRole::AoInstance);
  AOInstance inst =
      make_ao_instance(Algorithm::AmMlr, {0.8, 0.3}, 0.2, 1500, 150, rng);
  inst.v_n.setZero();
  // Tilt omega toward the third column so the least-squares solution is
  // feasible for the constrained (nu >= 0) numeric check too.
  inst.omega += 0.2 * inst.A.col(2);
  const HoMinimizerResult res = ho_minimizer(inst);
  const Eigen::Vector3d ls =
      (inst.A.transpose() * inst.A)
          .ldlt()
          .solve(inst.A.transpose() * inst.omega);
  REQUIRE(ls[2] > 0.0);
  CHECK(std::fabs(res.xi.alpha - ls[0]) <= 1e-10);
  CHECK(std::fabs(res.xi.mu - ls[1]) <= 1e-10);
  CHECK(std::fabs(res.xi.nu - ls[2]) <= 1e-10);

  const ExpandedState numeric = numeric_3var_check(inst);
  CHECK(std::fabs(numeric.alpha - ls[0]) <= 1e-8);
  CHECK(std::fabs(numeric.nu - ls[2]) <= 1e-8);
}

TEST_CASE("omega inside the span of A is rejected") {
  RngStream rng(8, StreamRole::AoInstance);
  AOInstance inst =
      make_ao_instance(Algorithm::AmPr, {0.5, 0.5}, 0.1, 500, 50, rng);
  inst.omega = inst.A * Eigen::Vector3d(0.3, -1.2, 0.7);
  CHECK_THROWS_WITH_AS(ho_minimizer(inst),
                       doctest::Contains("span"), std::runtime_error);
}

TEST_CASE("tau denominator failure is reported") {
  RngStream rng(9, StreamRole::AoInstance);
  AOInstance inst =
      make_ao_instance(Algorithm::AmPr, {0.5, 0.5}, 0.1, 500, 50, rng);
  inst.v_n[2] = 10.0;  // forces 1 - n v^T (A^T A)^{-1} v < 0
  CHECK_THROWS_WITH_AS(ho_minimizer(inst), doctest::Contains("radicand"),
                       std::runtime_error);
}

TEST_CASE("first-order minimizers") {
  RngStream rng(10, StreamRole::AoInstance);
  const AOInstance inst =
      make_ao_instance(Algorithm::GdPr, {0.6, 0.8}, 0.1, 1000, 100, rng);

  const ExpandedState id = fo_minimizer(inst, {0.6, 0.8}, 0.0);
  CHECK(id.alpha == 0.6);
  CHECK(id.mu == 0.8);
  CHECK(id.nu == 0.0);

  AOInstance zero = inst;
  zero.omega.setZero();
  const ExpandedState z = fo_minimizer(zero, {0.6, 0.8}, 0.5);
  CHECK(z.alpha == 0.6);
  CHECK(z.mu == 0.8);
  CHECK(z.nu == 0.0);
}

TEST_CASE("nonnegativity of the constrained coordinate") {
  RngStream rng(11, StreamRole::AoInstance);
  AOInstance inst =
      make_ao_instance(Algorithm::AmPr, {0.9, 0.2}, 0.05, 800, 80, rng);
  inst.v_n[2] = 0.0;
  // Make omega orthogonal to the third column so the unconstrained optimum
  // has no incentive to use it.
  const auto g = inst.A.col(2);
  inst.omega -= g * (g.dot(inst.omega) / g.squaredNorm());
  const ExpandedState numeric = numeric_3var_check(inst);
  CHECK(numeric.nu >= 0.0);
  CHECK(numeric.nu <= 1e-6);
}

TEST_CASE("first-order minimizers concentrate at the deterministic triple") {
  const StatePoint s{0.6, 0.8};
  const double sigma = 0.1, eta = 0.5;
  const int n = 100000, d = 1000, reps = 20;
  const double kappa = static_cast<double>(n) / d;
  const ExpandedState target =
      gordon_expanded_fo(s, Algorithm::GdPr, sigma, kappa, eta);
  double mean_err = 0.0;
  for (int k = 0; k < reps; ++k) {
    RngStream rng(300 + k, StreamRole::AoInstance, k);
    const AOInstance inst =
        make_ao_instance(Algorithm::GdPr, s, sigma, n, d, rng);
    const ExpandedState xi = fo_minimizer(inst, s, eta);
    mean_err += std::max({std::fabs(xi.alpha - target.alpha),
                          std::fabs(xi.mu - target.mu),
                          std::fabs(xi.nu - target.nu)}) /
                reps;
  }
  CHECK(mean_err <= 0.01);
}

TEST_CASE("dual variable concentrates at large n") {
  RngStream rng(12, StreamRole::AoInstance);
  const StatePoint s{0.6, 0.8};
  const double sigma = 0.1;
  const int n = 100000, d = 1000;
  const AOInstance inst =
      make_ao_instance(Algorithm::AmPr, s, sigma, n, d, rng);
  const HoMinimizerResult res = ho_minimizer(inst);
  const OmegaMomentsClosed m =
      ho_moments_closed(ModelKind::PhaseRetrieval, s, sigma);
  const double kappa = static_cast<double>(n) / d;
  const double tau_target = std::sqrt(kappa / (kappa - 1.0) * m.h);
  CHECK(std::fabs(res.tau - tau_target) <= 0.02);
}

TEST_CASE("strong convexity witness at the minimizer") {
  for (int k = 0; k < 5; ++k) {
    RngStream rng(200 + k, StreamRole::AoInstance, k);
    const AOInstance inst =
        make_ao_instance(Algorithm::AmPr, {0.7, 0.4}, 0.1, 2000, 100, rng);
    const HoMinimizerResult res = ho_minimizer(inst);
    CHECK(hessian_min_eigenvalue(inst, res.xi) >= 1e-3);
  }
}
