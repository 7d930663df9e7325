#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gordonse/types.hpp"

namespace gordonse {

struct TrajectoryRecord;

/// l2 distance of the state to the sign-ambiguous truth set {-theta*, theta*}:
/// sqrt((1 - |alpha|)^2 + beta^2).
double d_l2(const StatePoint& s);

/// Angle to the truth set: atan(beta/|alpha|) in [0, pi/2].
double d_angle(const StatePoint& s);

/// The good region: 0.55 <= alpha <= 1.05 and alpha/beta >= 5 (beta = 0
/// counts as in-region when alpha is in range). Boundaries inclusive.
bool in_good_region(const StatePoint& s);

/// Log-log rate fit of an error sequence d_0, d_1, ...
struct RateFit {
  double exponent_lambda = 0.0;
  double coefficient = 0.0;
  double floor = 0.0;    // detected error plateau (0 when none)
  int window_begin = 0;  // first iteration used
  int window_end = 0;    // one past the last pair's predictor index
  int points_used = 0;   // usable points above the floor guard
  double r_squared = 0.0;
  bool classified = false;  // r_squared >= 0.98
};

/// Detects the floor as the median of the last 3 values when their relative
/// spread is < 5% (else 0), drops iterations with d <= floor_guard * floor,
/// and regresses log d_{t+1} on log d_t over the remaining window.
/// Throws std::runtime_error("insufficient pre-floor trajectory") when fewer
/// than 4 usable points remain.
RateFit fit_rate(const std::vector<double>& errors, double floor_guard = 2.0);

/// Per-iteration and per-trial deviations between empirical trajectories and
/// a deterministic prediction, in all four tracked quantities.
struct DeviationReport {
  int iterations = 0;  // points per trajectory (T + 1)
  int trials = 0;
  // Indexed [iteration]; deviations of alpha, beta, d_l2, d_angle.
  std::vector<double> mean_dev_alpha, mean_dev_beta, mean_dev_l2, mean_dev_angle;
  std::vector<double> max_dev_alpha, max_dev_beta, max_dev_l2, max_dev_angle;
  // Envelope of the empirical d_l2 / d_angle across trials, per iteration.
  std::vector<double> env_min_l2, env_max_l2, env_min_angle, env_max_angle;
  // Per-trial max over iterations of |d_l2(emp) - d_l2(pred)|.
  std::vector<double> per_trial_max_l2;
  double mean_max_l2 = 0.0;  // mean over trials of per_trial_max_l2
  double max_max_l2 = 0.0;
};

DeviationReport deviation_report(std::span<const TrajectoryRecord> trials,
                                 const std::vector<StatePoint>& prediction);

/// A named inequality evaluated on a state; the margin is >= 0 when the
/// inequality holds (violation magnitude otherwise).
struct PropertyCheck {
  std::string name;
  std::function<double(const StatePoint&)> margin;
};

struct PropertyResult {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;
  StatePoint worst_at;
  int evaluated = 0;
};

/// Evaluates every check on every grid state and reports the worst margin.
std::vector<PropertyResult> map_property_scan(
    std::span<const StatePoint> grid, std::span<const PropertyCheck> checks);

/// Rectangular state grid (alpha x beta), inclusive of endpoints.
std::vector<StatePoint> state_grid(double a_lo, double a_hi, int na,
                                   double b_lo, double b_hi, int nb);

/// Grid of the good region itself: alpha in [0.55, 1.05], beta in [0, alpha/5].
std::vector<StatePoint> good_region_grid(int na, int nb);

/// The map-inequality suite (items a-g) at the given kappa, checked over
/// sigma in `sigmas` where an item depends on sigma.
std::vector<PropertyCheck> map_bound_checks(double kappa,
                                            std::span<const double> sigmas);

/// The gradient-inequality suite (items a-d), central differences with the
/// given step and slack, on the domain {rho <= 1/4, alpha >= 1/2}.
std::vector<PropertyCheck> gradient_bound_checks(double kappa,
                                                 std::span<const double> sigmas,
                                                 double fd_step = 1e-5,
                                                 double slack = 1e-3);

}  // namespace gordonse
