#include <doctest.h>

#include <cmath>

#include "gordonse/oracle.hpp"
#include "gordonse/state_evolution.hpp"

using namespace gordonse;

namespace {
constexpr std::uint64_t kSamples = 1000000;
}

TEST_CASE("known second moment: E[W^2] = 1 + sigma^2") {
  for (double sigma : {0.0, 0.3}) {
    const OracleEstimate e = estimate_expectations(
        {Algorithm::AmPr, sigma, {0.44, 0.9}}, kSamples, 101, 2);
    CHECK(std::fabs(e.e_omega2 - (1.0 + sigma * sigma)) <= 4.0 * e.se_omega2);
  }
}

TEST_CASE("known first moments at (0.6, 0.8)") {
  const OracleEstimate e = estimate_expectations(
      {Algorithm::AmPr, 0.0, {0.6, 0.8}}, kSamples, 102, 2);
  const double phi = std::atan2(0.8, 0.6);
  const double e1 = 1.0 - (2.0 * phi - std::sin(2.0 * phi)) / M_PI;
  const double e2 = 2.0 / M_PI * std::sin(phi) * std::sin(phi);
  CHECK(std::fabs(e.e_z1_omega - e1) <= 4.0 * e.se_z1_omega);
  CHECK(std::fabs(e.e_z2_omega - e2) <= 4.0 * e.se_z2_omega);
}

TEST_CASE("first-order weight vanishes at the truth") {
  const OracleEstimate e = estimate_expectations(
      {Algorithm::GdPr, 0.0, {1.0, 0.0}}, 100000, 103, 1);
  CHECK(e.e_omega2 == 0.0);
  CHECK(e.e_z1_omega == 0.0);
  CHECK(e.e_z2_omega == 0.0);
  CHECK(e.max_abs_omega == 0.0);
}

TEST_CASE("assumption report") {
  // Variance functional is at least sigma^2 (equality at rho = 0).
  const AssumptionReport pr =
      verify_assumptions({Algorithm::AmPr, 0.2, {0.8, 0.35}}, 200000, 104, 2);
  CHECK(pr.lb_value >= 0.04 - 4.0 * pr.lb_stderr);

  const AssumptionReport mlr =
      verify_assumptions({Algorithm::AmMlr, 0.25, {0.9, 0.0}}, 200000, 105, 2);
  CHECK(std::fabs(mlr.lb_value - 0.0625) <= 4.0 * mlr.lb_stderr);

  const AssumptionReport zero =
      verify_assumptions({Algorithm::GdPr, 0.0, {1.0, 0.0}}, 100000, 106, 1);
  CHECK(zero.lb_value == 0.0);
  CHECK(zero.lb_stderr == 0.0);
  CHECK(zero.tail_ratio == 0.0);

  // Sub-Gaussian tail diagnostic stays bounded.
  CHECK(pr.tail_ratio > 0.0);
  CHECK(pr.tail_ratio < 10.0);
}

TEST_CASE("expanded update assembled from the oracle") {
  // nu at (0, 1), sigma = 0, kappa = 2 approaches sqrt(1 - 4/pi^2).
  const OracleExpanded oe = gordon_from_oracle(
      {Algorithm::AmPr, 0.0, {0.0, 1.0}}, 2.0, UpdateOrder::HigherOrder, 0.5,
      10000000, 107, 2);
  const double target = std::sqrt(1.0 - 4.0 / (M_PI * M_PI));
  CHECK(std::fabs(oe.state.nu - target) <= 4.0 * oe.se_nu);

  // eta = 0 in the first-order update is exact.
  const OracleExpanded id = gordon_from_oracle(
      {Algorithm::GdPr, 0.1, {0.45, 0.62}}, 20.0, UpdateOrder::FirstOrder, 0.0,
      10000, 108, 1);
  CHECK(id.state.alpha == 0.45);
  CHECK(id.state.mu == 0.62);
  CHECK(id.state.nu == 0.0);
}

TEST_CASE("higher-order beta reconstruction matches the closed 2-D map") {
  for (Algorithm alg : {Algorithm::AmPr, Algorithm::AmMlr}) {
    const StatePoint s{0.7, 0.5};
    const double sigma = 0.2, kappa = 20.0;
    const OracleExpanded oe = gordon_from_oracle(
        {alg, sigma, s}, kappa, UpdateOrder::HigherOrder, 0.5, kSamples,
        109 + static_cast<int>(alg), 2);
    const StatePoint closed = gordon_map(alg, s, sigma, kappa);
    const double beta_mc = oe.state.beta();
    // Conservative propagated error for sqrt(mu^2 + nu^2).
    const double se_beta = (std::fabs(oe.state.mu) * oe.se_mu +
                            std::fabs(oe.state.nu) * oe.se_nu) /
                               std::max(beta_mc, 1e-12) +
                           1e-12;
    CHECK(std::fabs(beta_mc - closed.beta) <= 4.0 * se_beta);
    CHECK(std::fabs(oe.state.alpha - closed.alpha) <= 4.0 * oe.se_alpha);
  }
}

TEST_CASE("determinism and thread independence") {
  const OmegaSpec spec{Algorithm::SubgradAmMlr, 0.3, {0.5, 0.55}};
  const OracleEstimate a = estimate_expectations(spec, 300000, 42, 1);
  const OracleEstimate b = estimate_expectations(spec, 300000, 42, 2);
  CHECK(a.e_omega2 == b.e_omega2);
  CHECK(a.e_z1_omega == b.e_z1_omega);
  CHECK(a.e_z2_omega == b.e_z2_omega);
  CHECK(a.max_abs_omega == b.max_abs_omega);
}

TEST_CASE("independent seeds agree within combined error") {
  const OmegaSpec spec{Algorithm::AmMlr, 0.1, {0.8, 0.4}};
  const OracleEstimate a = estimate_expectations(spec, 500000, 1000, 2);
  const OracleEstimate b = estimate_expectations(spec, 500000, 2000, 2);
  const double combined =
      std::sqrt(a.se_z1_omega * a.se_z1_omega + b.se_z1_omega * b.se_z1_omega);
  CHECK(std::fabs(a.e_z1_omega - b.e_z1_omega) <= 6.0 * combined);
}

TEST_CASE("parameter validation") {
  const OmegaSpec spec{Algorithm::AmPr, 0.0, {0.6, 0.8}};
  CHECK_THROWS(gordon_from_oracle(spec, 1.0, UpdateOrder::HigherOrder, 0.5,
                                  10000, 1, 1));
  CHECK_THROWS(gordon_from_oracle(spec, 0.0, UpdateOrder::FirstOrder, 0.5,
                                  10000, 1, 1));
  CHECK_THROWS(estimate_expectations(spec, 0, 1, 1));
}
