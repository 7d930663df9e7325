#pragma once

#include <cstdint>

#include "gordonse/kernels.hpp"
#include "gordonse/types.hpp"

namespace gordonse {

/// What to average: the weight variable W = omega(alpha Z1 + beta Z2,
/// f(Z1; Q) + sigma Z3) of an algorithm at a given current state.
struct OmegaSpec {
  Algorithm alg = Algorithm::AmPr;
  double sigma = 0.0;
  StatePoint state;
};

/// Monte-Carlo estimates of E[W^2], E[Z1 W], E[Z2 W] with standard errors
/// and the full sample covariance (used for delta-method propagation).
struct OracleEstimate {
  double e_omega2 = 0.0;
  double e_z1_omega = 0.0;
  double e_z2_omega = 0.0;
  double se_omega2 = 0.0;
  double se_z1_omega = 0.0;
  double se_z2_omega = 0.0;
  double cov[3][3] = {};  // sample covariance of (W^2, Z1 W, Z2 W)
  double max_abs_omega = 0.0;
  std::uint64_t samples = 0;
};

/// Plain Monte Carlo over `samples` draws; same seed gives bit-identical
/// results for any thread count (fixed shards, ordered reduction).
OracleEstimate estimate_expectations(const OmegaSpec& spec,
                                     std::uint64_t samples, std::uint64_t seed,
                                     int threads = 1);

/// Empirical check of the two working assumptions on W: the variance-like
/// functional E[W^2] - E[Z1 W]^2 - E[Z2 W]^2 (with delta-method stderr) and a
/// sub-Gaussian tail diagnostic max|W| / sqrt(2 log N).
struct AssumptionReport {
  double lb_value = 0.0;  // E[W^2] - E[Z1 W]^2 - E[Z2 W]^2
  double lb_stderr = 0.0;
  double max_abs_omega = 0.0;
  double tail_ratio = 0.0;  // max|W| / sqrt(2 log N)
  std::uint64_t samples = 0;
};

AssumptionReport verify_assumptions(const OmegaSpec& spec,
                                    std::uint64_t samples, std::uint64_t seed,
                                    int threads = 1);

/// Expanded Gordon update assembled from Monte-Carlo estimates, with
/// first-order delta-method standard errors per component.
struct OracleExpanded {
  ExpandedState state;
  double se_alpha = 0.0;
  double se_mu = 0.0;
  double se_nu = 0.0;
  OracleEstimate raw;
};

/// order = HigherOrder requires kappa > 1. Throws when the higher-order
/// radicand is negative beyond 4 standard errors; small negative estimates
/// within noise are clamped to zero.
OracleExpanded gordon_from_oracle(const OmegaSpec& spec, double kappa,
                                  UpdateOrder order, double eta,
                                  std::uint64_t samples, std::uint64_t seed,
                                  int threads = 1);

}  // namespace gordonse
