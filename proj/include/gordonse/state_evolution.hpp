#pragma once

#include <vector>

#include "gordonse/types.hpp"

namespace gordonse {

/// Closed-form Gaussian moments of the weight variable
/// W = omega(alpha*Z1 + beta*Z2, link(Z1; Q) + sigma*Z3):
///   e1 = E[Z1 W], e2 = E[Z2 W], e0 = E[W^2] = 1 + sigma^2,
///   u  = 1 - e1 evaluated without cancellation,
///   h  = e0 - e1^2 - e2^2 = sigma^2 + u*(2-u) - e2^2, also cancellation-free.
/// The stable forms keep the sigma/sqrt(kappa) noise floor intact even when
/// sigma^2 is far below double epsilon relative to 1.
struct OmegaMomentsClosed {
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double u = 0.0;
  double h = 0.0;
};

/// Higher-order weight moments for the given model at state (|alpha|, beta).
OmegaMomentsClosed ho_moments_closed(ModelKind model, const StatePoint& s,
                                     double sigma);

// 2-D Gordon state evolution maps. States with alpha < 0 are reflected
// through the global sign symmetry: the map is applied at (|alpha|, beta) and
// the sign of alpha is carried to the output.
StatePoint gordon_am_pr(const StatePoint& s, double sigma, double kappa);
StatePoint gordon_gd_pr(const StatePoint& s, double sigma, double kappa,
                        double eta);
StatePoint gordon_am_mlr(const StatePoint& s, double sigma, double kappa);
StatePoint gordon_subgrad_mlr(const StatePoint& s, double sigma, double kappa,
                              double eta);

/// Dispatch to the Gordon map of `alg` (eta ignored for higher-order kinds).
StatePoint gordon_map(Algorithm alg, const StatePoint& s, double sigma,
                      double kappa, double eta = 0.5);

/// Infinite-sample limit of the Gordon map: identical code path with the
/// 1/(kappa-1) (resp. 1/kappa) correction terms zeroed.
StatePoint population(Algorithm alg, const StatePoint& s, double sigma,
                      double eta = 0.5);

// Expanded 3-D deterministic updates from the current state (alpha#, beta#).
ExpandedState gordon_expanded_ho(const StatePoint& sharp, Algorithm alg,
                                 double sigma, double kappa);
ExpandedState gordon_expanded_fo(const StatePoint& sharp, Algorithm alg,
                                 double sigma, double kappa, double eta);

enum class SEKind { Gordon, Population };

/// A deterministic state-evolution operator: algorithm + Gordon/population
/// flavor + parameters. Pure and freely shareable across threads.
struct SEOperator {
  Algorithm alg = Algorithm::AmPr;
  SEKind kind = SEKind::Gordon;
  double sigma = 0.0;
  double kappa = 0.0;  // ignored for Population
  double eta = 0.5;    // used by first-order kinds only

  StatePoint apply(const StatePoint& s) const;

  /// True when a first-order Gordon map is evaluated outside the stepsize
  /// range it is stated for (eta > 1/2). The formulas are still evaluated
  /// literally; callers may surface the advisory.
  bool eta_advisory() const {
    return order_of(alg) == UpdateOrder::FirstOrder && eta > 0.5;
  }
};

/// Deterministic sequence S^t(s0) for t = 0..T (length T+1).
std::vector<StatePoint> iterate_se(const SEOperator& op, const StatePoint& s0,
                                   int T);

}  // namespace gordonse
