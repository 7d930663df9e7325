#include "gordonse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gordonse/iterates.hpp"
#include "gordonse/state_evolution.hpp"

namespace gordonse {

double d_l2(const StatePoint& s) {
  return std::hypot(1.0 - std::fabs(s.alpha), s.beta);
}

double d_angle(const StatePoint& s) {
  return std::atan2(s.beta, std::fabs(s.alpha));
}

bool in_good_region(const StatePoint& s) {
  if (!(s.alpha >= 0.55 && s.alpha <= 1.05)) return false;
  return s.beta == 0.0 || s.alpha / s.beta >= 5.0;
}

RateFit fit_rate(const std::vector<double>& errors, double floor_guard) {
  RateFit fit;
  const int n = static_cast<int>(errors.size());
  if (n >= 3) {
    double last[3] = {errors[n - 3], errors[n - 2], errors[n - 1]};
    std::sort(last, last + 3);
    const double med = last[1];
    if (med > 0.0 && (last[2] - last[0]) / med < 0.05) fit.floor = med;
  }

  const double cut = floor_guard * fit.floor;
  std::vector<int> usable;
  for (int t = 0; t < n; ++t)
    if (errors[t] > cut && errors[t] > 0.0) usable.push_back(t);
  fit.points_used = static_cast<int>(usable.size());

  std::vector<double> xs, ys;
  for (int t = 0; t + 1 < n; ++t) {
    if (errors[t] > cut && errors[t + 1] > cut && errors[t] > 0.0 &&
        errors[t + 1] > 0.0) {
      xs.push_back(std::log(errors[t]));
      ys.push_back(std::log(errors[t + 1]));
      if (xs.size() == 1) fit.window_begin = t;
      fit.window_end = t + 1;
    }
  }
  if (fit.points_used < 4 || xs.size() < 3)
    throw std::runtime_error("insufficient pre-floor trajectory");

  const auto m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::runtime_error("degenerate rate-fit window");
  fit.exponent_lambda = sxy / sxx;
  fit.coefficient = std::exp(my - fit.exponent_lambda * mx);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.classified = fit.r_squared >= 0.98;
  return fit;
}

DeviationReport deviation_report(std::span<const TrajectoryRecord> trials,
                                 const std::vector<StatePoint>& prediction) {
  DeviationReport rep;
  rep.trials = static_cast<int>(trials.size());
  rep.iterations = static_cast<int>(prediction.size());
  for (const auto& tr : trials)
    if (static_cast<int>(tr.points.size()) != rep.iterations)
      throw std::invalid_argument(
          "trajectory length does not match prediction length");

  const int T = rep.iterations;
  auto zeros = [T] { return std::vector<double>(T, 0.0); };
  rep.mean_dev_alpha = zeros();
  rep.mean_dev_beta = zeros();
  rep.mean_dev_l2 = zeros();
  rep.mean_dev_angle = zeros();
  rep.max_dev_alpha = zeros();
  rep.max_dev_beta = zeros();
  rep.max_dev_l2 = zeros();
  rep.max_dev_angle = zeros();
  rep.env_min_l2.assign(T, std::numeric_limits<double>::infinity());
  rep.env_max_l2.assign(T, 0.0);
  rep.env_min_angle.assign(T, std::numeric_limits<double>::infinity());
  rep.env_max_angle.assign(T, 0.0);

  for (const auto& tr : trials) {
    double trial_max_l2 = 0.0;
    for (int t = 0; t < T; ++t) {
      const StatePoint& e = tr.points[t].state;
      const StatePoint& p = prediction[t];
      const double da = std::fabs(e.alpha - p.alpha);
      const double db = std::fabs(e.beta - p.beta);
      const double dl = std::fabs(d_l2(e) - d_l2(p));
      const double dg = std::fabs(d_angle(e) - d_angle(p));
      rep.mean_dev_alpha[t] += da;
      rep.mean_dev_beta[t] += db;
      rep.mean_dev_l2[t] += dl;
      rep.mean_dev_angle[t] += dg;
      rep.max_dev_alpha[t] = std::max(rep.max_dev_alpha[t], da);
      rep.max_dev_beta[t] = std::max(rep.max_dev_beta[t], db);
      rep.max_dev_l2[t] = std::max(rep.max_dev_l2[t], dl);
      rep.max_dev_angle[t] = std::max(rep.max_dev_angle[t], dg);
      rep.env_min_l2[t] = std::min(rep.env_min_l2[t], d_l2(e));
      rep.env_max_l2[t] = std::max(rep.env_max_l2[t], d_l2(e));
      rep.env_min_angle[t] = std::min(rep.env_min_angle[t], d_angle(e));
      rep.env_max_angle[t] = std::max(rep.env_max_angle[t], d_angle(e));
      if (t >= 1) trial_max_l2 = std::max(trial_max_l2, dl);
    }
    rep.per_trial_max_l2.push_back(trial_max_l2);
  }
  if (rep.trials > 0) {
    for (int t = 0; t < T; ++t) {
      rep.mean_dev_alpha[t] /= rep.trials;
      rep.mean_dev_beta[t] /= rep.trials;
      rep.mean_dev_l2[t] /= rep.trials;
      rep.mean_dev_angle[t] /= rep.trials;
    }
    double s = 0.0;
    for (double v : rep.per_trial_max_l2) {
      s += v;
      rep.max_max_l2 = std::max(rep.max_max_l2, v);
    }
    rep.mean_max_l2 = s / rep.trials;
  }
  return rep;
}

std::vector<PropertyResult> map_property_scan(
    std::span<const StatePoint> grid, std::span<const PropertyCheck> checks) {
  std::vector<PropertyResult> out;
  out.reserve(checks.size());
  for (const auto& c : checks) {
    PropertyResult r;
    r.name = c.name;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& s : grid) {
      const double m = c.margin(s);
      if (std::isnan(m)) continue;  // check not applicable at this state
      ++r.evaluated;
      if (m < r.worst_margin) {
        r.worst_margin = m;
        r.worst_at = s;
      }
    }
    r.pass = r.evaluated > 0 && r.worst_margin >= 0.0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StatePoint> state_grid(double a_lo, double a_hi, int na,
                                   double b_lo, double b_hi, int nb) {
  std::vector<StatePoint> g;
  g.reserve(static_cast<std::size_t>(na) * nb);
  for (int i = 0; i < na; ++i) {
    const double a = na == 1 ? a_lo : a_lo + (a_hi - a_lo) * i / (na - 1);
    for (int j = 0; j < nb; ++j) {
      const double b = nb == 1 ? b_lo : b_lo + (b_hi - b_lo) * j / (nb - 1);
      g.push_back({a, b});
    }
  }
  return g;
}

std::vector<StatePoint> good_region_grid(int na, int nb) {
  std::vector<StatePoint> g;
  g.reserve(static_cast<std::size_t>(na) * nb);
  for (int i = 0; i < na; ++i) {
    const double a = 0.55 + 0.5 * i / (na - 1);
    for (int j = 0; j < nb; ++j) {
      const double b = (a / 5.0) * j / (nb - 1);
      g.push_back({a, b});
    }
  }
  return g;
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGuardNan = std::numeric_limits<double>::quiet_NaN();

// Map shorthands used by the inequality suites. F/G/g are the phase
// retrieval alpha/beta maps (higher- and first-order at eta = 1/2), the
// sigma-subscripted versions the mixture maps.
double F_mlr(const StatePoint& s, double sigma) {
  return population(Algorithm::AmMlr, s, sigma).alpha;
}
double G_pr(const StatePoint& s, double sigma, double kappa) {
  return gordon_am_pr(s, sigma, kappa).beta;
}
double g_pr(const StatePoint& s, double sigma, double kappa) {
  return gordon_gd_pr(s, sigma, kappa, 0.5).beta;
}
double G_mlr(const StatePoint& s, double sigma, double kappa) {
  return gordon_am_mlr(s, sigma, kappa).beta;
}
double g_mlr(const StatePoint& s, double sigma, double kappa) {
  return gordon_subgrad_mlr(s, sigma, kappa, 0.5).beta;
}
double rho_B(const StatePoint& s, double sigma) {
  return population(Algorithm::AmMlr, s, sigma).beta;
}

// |dF/da| + |dF/db| by central differences.
template <class Map>
double grad_l1(const Map& f, const StatePoint& s, double h) {
  const double da =
      (f({s.alpha + h, s.beta}) - f({s.alpha - h, s.beta})) / (2.0 * h);
  const double db =
      (f({s.alpha, s.beta + h}) - f({s.alpha, s.beta - h})) / (2.0 * h);
  return std::fabs(da) + std::fabs(db);
}

}  // namespace

std::vector<PropertyCheck> map_bound_checks(double kappa,
                                            std::span<const double> sigmas) {
  std::vector<PropertyCheck> checks;
  const std::vector<double> sig(sigmas.begin(), sigmas.end());

  checks.push_back({"map.a.lower: (1 - 4phi^3/(3pi))+ <= F0",
                    [](const StatePoint& s) {
                      const double phi = s.phi();
                      const double lb =
                          std::max(1.0 - 4.0 * phi * phi * phi / (3.0 * kPi), 0.0);
                      return F_mlr(s, 0.0) - lb;
                    }});
  checks.push_back({"map.a.upper: F0 <= 1", [](const StatePoint& s) {
                      return 1.0 - F_mlr(s, 0.0);
                    }});
  checks.push_back({"map.a.gap: 1 - F0 >= (2/5) phi^3 for rho <= 1/5",
                    [](const StatePoint& s) {
                      if (!(s.rho() <= 0.2)) return kGuardNan;
                      const double phi = s.phi();
                      return (1.0 - F_mlr(s, 0.0)) - 0.4 * phi * phi * phi;
                    }});
  checks.push_back({"map.b: F0 >= 1.06 alpha for rho >= 2, beta <= 1",
                    [](const StatePoint& s) {
                      if (!(s.rho() >= 2.0 && s.beta <= 1.0)) return kGuardNan;
                      return F_mlr(s, 0.0) - 1.06 * s.alpha;
                    }});
  checks.push_back({"map.c.monotone: F_sigma nondecreasing in sigma",
                    [sig](const StatePoint& s) {
                      double worst = std::numeric_limits<double>::infinity();
                      for (std::size_t i = 1; i < sig.size(); ++i)
                        worst = std::min(
                            worst, F_mlr(s, sig[i]) - F_mlr(s, sig[i - 1]));
                      return worst;
                    }});
  checks.push_back({"map.c.upper: F_sigma <= 1 + 2 sigma^3/(3pi)",
                    [sig](const StatePoint& s) {
                      double worst = std::numeric_limits<double>::infinity();
                      for (double sg : sig)
                        worst = std::min(worst, 1.0 + 2.0 * sg * sg * sg /
                                                          (3.0 * kPi) -
                                                    F_mlr(s, sg));
                      return worst;
                    }});
  checks.push_back(
      {"map.d: sqrt(1 - F^2)/sqrt(k-1) <= G_sigma <= 0.8 for sigma <= 0.5",
       [sig, kappa](const StatePoint& s) {
         double worst = std::numeric_limits<double>::infinity();
         for (double sg : sig) {
           if (sg > 0.5) continue;
           const double G = G_mlr(s, sg, kappa);
           const double F = F_mlr(s, sg);
           const double lb =
               std::sqrt(std::max(1.0 - F * F, 0.0)) / std::sqrt(kappa - 1.0);
           worst = std::min(worst, std::min(0.8 - G, G - lb));
         }
         return worst;
       }});
  checks.push_back({"map.e: G0^2 <= phi^3/10 inside the good region",
                    [kappa](const StatePoint& s) {
                      if (!in_good_region(s)) return kGuardNan;
                      const double G = G_mlr(s, 0.0, kappa);
                      const double phi = s.phi();
                      return phi * phi * phi / 10.0 - G * G;
                    }});
  checks.push_back(
      {"map.f: (k-1)/k G^2 <= g^2 <= G^2 + (2/k)(dl2^2 + (rhoB)^2 + (1-F)^2)",
       [sig, kappa](const StatePoint& s) {
         double worst = std::numeric_limits<double>::infinity();
         for (double sg : sig) {
           const double G = G_mlr(s, sg, kappa);
           const double gg = g_mlr(s, sg, kappa);
           const double F = F_mlr(s, sg);
           const double rb = rho_B(s, sg);
           const double lo = gg * gg - (kappa - 1.0) / kappa * G * G;
           const double dl = d_l2(s);
           const double hi = G * G +
                             2.0 / kappa *
                                 (dl * dl + rb * rb + (1.0 - F) * (1.0 - F)) -
                             gg * gg;
           worst = std::min(worst, std::min(lo, hi));
         }
         return worst;
       }});
  checks.push_back(
      {"map.g: two-sided bound on G_sigma/F_sigma for rho <= 2, sigma <= 0.5",
       [sig, kappa](const StatePoint& s) {
         if (!(s.rho() <= 2.0)) return kGuardNan;
         double worst = std::numeric_limits<double>::infinity();
         for (double sg : sig) {
           if (sg > 0.5) continue;
           const double ratio = G_mlr(s, sg, kappa) / F_mlr(s, sg);
           const double rb = rho_B(s, sg);
           const double lb =
               std::sqrt(rb * rb * (kappa - 2.0) / (kappa - 1.0) +
                         sg * sg / (2.0 * (kappa - 1.0))) /
               (1.0 + 2.0 * sg * sg * sg / (3.0 * kPi));
           const double ub =
               0.8 * s.rho() + 2.0 * sg / std::sqrt(kappa - 1.0);
           worst = std::min(worst, std::min(ub - ratio, ratio - lb));
         }
         return worst;
       }});
  return checks;
}

std::vector<PropertyCheck> gradient_bound_checks(double kappa,
                                                 std::span<const double> sigmas,
                                                 double fd_step, double slack) {
  std::vector<PropertyCheck> checks;
  const std::vector<double> sig(sigmas.begin(), sigmas.end());
  const double h = fd_step;
  auto in_domain = [h](const StatePoint& s) {
    return s.alpha >= 0.5 && s.beta >= h && s.rho() <= 0.25;
  };

  checks.push_back(
      {"grad.a: |grad F_sigma|_1 <= 0.5 on {rho <= 1/4, alpha >= 1/2}",
       [sig, h, slack, in_domain](const StatePoint& s) {
         if (!in_domain(s)) return kGuardNan;
         double worst = std::numeric_limits<double>::infinity();
         for (double sg : sig) {
           if (sg > 0.5) continue;
           const double g = grad_l1(
               [sg](const StatePoint& p) { return F_mlr(p, sg); }, s, h);
           worst = std::min(worst, 0.5 + slack - g);
         }
         return worst;
       }});
  checks.push_back(
      {"grad.b: |grad G_sigma|_1 <= 0.98 on {rho <= 1/4, alpha >= 1/2}",
       [sig, h, slack, kappa, in_domain](const StatePoint& s) {
         if (!in_domain(s)) return kGuardNan;
         double worst = std::numeric_limits<double>::infinity();
         for (double sg : sig) {
           if (sg > 0.5) continue;
           const double g = grad_l1(
               [sg, kappa](const StatePoint& p) { return G_mlr(p, sg, kappa); },
               s, h);
           worst = std::min(worst, 0.98 + slack - g);
         }
         return worst;
       }});
  checks.push_back(
      {"grad.c: noisy phase-retrieval map gradients dominated by noiseless",
       [sig, h, slack, kappa, in_domain](const StatePoint& s) {
         if (!in_domain(s)) return kGuardNan;
         double worst = std::numeric_limits<double>::infinity();
         const double gG0 = grad_l1(
             [kappa](const StatePoint& p) { return G_pr(p, 0.0, kappa); }, s,
             h);
         const double gg0 = grad_l1(
             [kappa](const StatePoint& p) { return g_pr(p, 0.0, kappa); }, s,
             h);
         for (double sg : sig) {
           const double gG = grad_l1(
               [sg, kappa](const StatePoint& p) { return G_pr(p, sg, kappa); },
               s, h);
           const double gg = grad_l1(
               [sg, kappa](const StatePoint& p) { return g_pr(p, sg, kappa); },
               s, h);
           worst = std::min(worst,
                            std::min(gG0 + slack - gG, gg0 + slack - gg));
         }
         return worst;
       }});
  checks.push_back(
      {"grad.d: |grad g_sigma|_1 <= |grad G_sigma|_1 + (3 + |grad "
       "F_sigma|_1)/sqrt(k)",
       [sig, h, slack, kappa, in_domain](const StatePoint& s) {
         if (!in_domain(s)) return kGuardNan;
         double worst = std::numeric_limits<double>::infinity();
         for (double sg : sig) {
           if (sg > 0.5) continue;
           const double gF = grad_l1(
               [sg](const StatePoint& p) { return F_mlr(p, sg); }, s, h);
           const double gG = grad_l1(
               [sg, kappa](const StatePoint& p) { return G_mlr(p, sg, kappa); },
               s, h);
           const double gg = grad_l1(
               [sg, kappa](const StatePoint& p) { return g_mlr(p, sg, kappa); },
               s, h);
           worst =
               std::min(worst, gG + (3.0 + gF) / std::sqrt(kappa) + slack - gg);
         }
         return worst;
       }});
  return checks;
}

}  // namespace gordonse
