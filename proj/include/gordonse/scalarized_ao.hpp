#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "gordonse/rng.hpp"
#include "gordonse/types.hpp"

namespace gordonse {

/// One random instance of the three-variable scalarized auxiliary problem:
/// minimize |A xi - omega|_2 / sqrt(n) - <v_n, xi> over xi in R^2 x [0, inf),
/// where A = [z1 | z2 | gamma_n] has i.i.d. standard normal entries and
/// v_n = [0, 0, |P_perp gamma_d|_2 / sqrt(n)].
struct AOInstance {
  Eigen::MatrixXd A;      // n x 3
  Eigen::VectorXd omega;  // length n
  Eigen::Vector3d v_n;    // [0, 0, v3]
  int n = 0;
  int d = 0;
};

/// Draws an instance for the given algorithm at current state (alpha#, beta#).
AOInstance make_ao_instance(Algorithm alg, const StatePoint& sharp,
                            double sigma, int n, int d, RngStream& rng);

struct HoMinimizerResult {
  ExpandedState xi;
  double tau = 0.0;
  double loss_value = 0.0;
  /// Set when the unclipped optimal value came out negative (the analytical
  /// simplification drops a positive-part clamp that holds with high
  /// probability).
  bool negative_loss_warning = false;
};

/// Closed-form minimizer of the higher-order scalarized auxiliary loss:
///   tau = (|r|_2/sqrt(n)) / sqrt(1 - n v^T (A^T A)^{-1} v),  r = residual of
///         the least squares of omega on A,
///   xi  = (A^T A)^{-1} A^T omega + tau n (A^T A)^{-1} v.
/// Errors when the tau denominator radicand is <= 0 (kappa too small) or the
/// residual norm is below 1e-12 (omega lies in the span of A).
HoMinimizerResult ho_minimizer(const AOInstance& inst);

/// First-order minimizers (explicit first-order conditions):
///   alpha = alpha# - (2 eta/n) <z1, omega>, mu = beta# - (2 eta/n) <z2, omega>,
///   nu = (2 eta/n) (<gamma_n, omega> + |P_perp gamma_d|_2 |omega|_2).
ExpandedState fo_minimizer(const AOInstance& inst, const StatePoint& sharp,
                           double eta);

/// Independent verification of ho_minimizer: direct numerical minimization of
/// the loss over R^2 x [0, inf) (projected Newton) to projected-gradient norm
/// <= 1e-9. Throws on non-convergence.
ExpandedState numeric_3var_check(const AOInstance& inst);

/// Minimum eigenvalue of the loss Hessian at xi (strong-convexity witness).
double hessian_min_eigenvalue(const AOInstance& inst, const ExpandedState& xi);

}  // namespace gordonse
