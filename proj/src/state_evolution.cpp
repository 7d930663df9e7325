#include "gordonse/state_evolution.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gordonse {

namespace {

constexpr double kPi = std::numbers::pi;

// x - sin(x), switching to the Taylor series for small x where the direct
// difference loses all significant digits.
double x_minus_sin(double x) {
  if (std::fabs(x) < 1e-1) {
    const double x2 = x * x;
    return x * x2 / 6.0 *
           (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  }
  return x - std::sin(x);
}

// atan(s) - s, same treatment. The series is truncated at s^9, so the
// switchover sits where its tail is far below the map tolerances.
double atan_minus_x(double s) {
  if (std::fabs(s) < 5e-2) {
    const double s2 = s * s;
    return -s * s2 *
           (1.0 / 3.0 - s2 * (1.0 / 5.0 - s2 * (1.0 / 7.0 - s2 / 9.0)));
  }
  return std::atan(s) - s;
}

OmegaMomentsClosed pr_moments(const StatePoint& s, double sigma) {
  OmegaMomentsClosed m;
  const double phi = s.phi();
  m.u = x_minus_sin(2.0 * phi) / kPi;  // 1 - E[Z1 W] >= 0
  m.e1 = 1.0 - m.u;
  const double sp = std::sin(phi);
  m.e2 = (2.0 / kPi) * sp * sp;
  m.e0 = 1.0 + sigma * sigma;
  m.h = sigma * sigma + m.u * (2.0 - m.u) - m.e2 * m.e2;
  return m;
}

OmegaMomentsClosed mlr_moments(const StatePoint& s, double sigma) {
  OmegaMomentsClosed m;
  const double rho = s.rho();
  if (std::isinf(rho)) {
    // phi = pi/2 limit: A -> 1, B -> 0, rho*B -> (2/pi) sqrt(1 + sigma^2).
    m.u = 1.0;
    m.e2 = (2.0 / kPi) * std::sqrt(1.0 + sigma * sigma);
  } else {
    const double r2 = rho * rho;
    const double sbar = std::sqrt(r2 + sigma * sigma * (1.0 + r2));
    const double b = (2.0 / kPi) * sbar / (1.0 + r2);
    // u = A - B = (2/pi) * [(atan(sbar) - sbar) + sbar * rho^2/(1+rho^2)]
    m.u = (2.0 / kPi) * (atan_minus_x(sbar) + sbar * r2 / (1.0 + r2));
    m.e2 = rho * b;
  }
  m.e1 = 1.0 - m.u;
  m.e0 = 1.0 + sigma * sigma;
  m.h = sigma * sigma + m.u * (2.0 - m.u) - m.e2 * m.e2;
  return m;
}

struct FoMoments {
  double e1 = 0.0;  // E[Z1 W_fo] = alpha - E[Z1 W_ho]
  double e2 = 0.0;  // E[Z2 W_fo] = beta - E[Z2 W_ho]
  double e0 = 0.0;  // E[W_fo^2], assembled as e1^2 + e2^2 + h (cancellation-free)
};

FoMoments fo_moments(const OmegaMomentsClosed& ho, double a, double b) {
  FoMoments f;
  f.e1 = a - ho.e1;
  f.e2 = b - ho.e2;
  f.e0 = f.e1 * f.e1 + f.e2 * f.e2 + ho.h;
  return f;
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
}

void check_kappa_ho(double kappa) {
  if (!(kappa > 1.0))
    throw std::invalid_argument(
        "higher-order Gordon map requires kappa > 1 (perpendicular correction "
        "undefined otherwise)");
}

void check_kappa_fo(double kappa) {
  if (!(kappa > 0.0))
    throw std::invalid_argument("first-order Gordon map requires kappa > 0");
}

void check_eta(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
}

// inv_corr = 1/(kappa-1) for Gordon, 0 for the population limit.
StatePoint ho_map(ModelKind model, const StatePoint& s, double sigma,
                  double inv_corr) {
  const StatePoint ref{std::fabs(s.alpha), s.beta};
  const OmegaMomentsClosed m = model == ModelKind::PhaseRetrieval
                                   ? pr_moments(ref, sigma)
                                   : mlr_moments(ref, sigma);
  const double sgn = sign1(s.alpha);
  const double beta_next = std::sqrt(m.e2 * m.e2 + m.h * inv_corr);
  return {sgn * m.e1, beta_next};
}

// inv_k = 1/kappa for Gordon, 0 for the population limit.
StatePoint fo_map(ModelKind model, const StatePoint& s, double sigma,
                  double eta, double inv_k) {
  const StatePoint ref{std::fabs(s.alpha), s.beta};
  const OmegaMomentsClosed ho = model == ModelKind::PhaseRetrieval
                                    ? pr_moments(ref, sigma)
                                    : mlr_moments(ref, sigma);
  const FoMoments f = fo_moments(ho, ref.alpha, ref.beta);
  const double sgn = sign1(s.alpha);
  const double a_next = ref.alpha - 2.0 * eta * f.e1;
  const double mu = ref.beta - 2.0 * eta * f.e2;
  const double beta_next =
      std::sqrt(mu * mu + 4.0 * eta * eta * inv_k * f.e0);
  return {sgn * a_next, beta_next};
}

}  // namespace

OmegaMomentsClosed ho_moments_closed(ModelKind model, const StatePoint& s,
                                     double sigma) {
  const StatePoint ref{std::fabs(s.alpha), s.beta};
  return model == ModelKind::PhaseRetrieval ? pr_moments(ref, sigma)
                                            : mlr_moments(ref, sigma);
}

StatePoint gordon_am_pr(const StatePoint& s, double sigma, double kappa) {
  check_sigma(sigma);
  check_kappa_ho(kappa);
  return ho_map(ModelKind::PhaseRetrieval, s, sigma, 1.0 / (kappa - 1.0));
}

StatePoint gordon_gd_pr(const StatePoint& s, double sigma, double kappa,
                        double eta) {
  check_sigma(sigma);
  check_kappa_fo(kappa);
  check_eta(eta);
  return fo_map(ModelKind::PhaseRetrieval, s, sigma, eta, 1.0 / kappa);
}

StatePoint gordon_am_mlr(const StatePoint& s, double sigma, double kappa) {
  check_sigma(sigma);
  check_kappa_ho(kappa);
  return ho_map(ModelKind::MixtureOfRegressions, s, sigma, 1.0 / (kappa - 1.0));
}

StatePoint gordon_subgrad_mlr(const StatePoint& s, double sigma, double kappa,
                              double eta) {
  check_sigma(sigma);
  check_kappa_fo(kappa);
  check_eta(eta);
  return fo_map(ModelKind::MixtureOfRegressions, s, sigma, eta, 1.0 / kappa);
}

StatePoint gordon_map(Algorithm alg, const StatePoint& s, double sigma,
                      double kappa, double eta) {
  switch (alg) {
    case Algorithm::AmPr: return gordon_am_pr(s, sigma, kappa);
    case Algorithm::GdPr: return gordon_gd_pr(s, sigma, kappa, eta);
    case Algorithm::AmMlr: return gordon_am_mlr(s, sigma, kappa);
    case Algorithm::SubgradAmMlr:
      return gordon_subgrad_mlr(s, sigma, kappa, eta);
  }
  throw std::logic_error("unreachable");
}

StatePoint population(Algorithm alg, const StatePoint& s, double sigma,
                      double eta) {
  check_sigma(sigma);
  const ModelKind model = model_of(alg);
  if (order_of(alg) == UpdateOrder::HigherOrder)
    return ho_map(model, s, sigma, 0.0);
  check_eta(eta);
  return fo_map(model, s, sigma, eta, 0.0);
}

ExpandedState gordon_expanded_ho(const StatePoint& sharp, Algorithm alg,
                                 double sigma, double kappa) {
  check_sigma(sigma);
  check_kappa_ho(kappa);
  const OmegaMomentsClosed m = ho_moments_closed(model_of(alg), sharp, sigma);
  return {m.e1, m.e2, std::sqrt(m.h / (kappa - 1.0))};
}

ExpandedState gordon_expanded_fo(const StatePoint& sharp, Algorithm alg,
                                 double sigma, double kappa, double eta) {
  check_sigma(sigma);
  check_kappa_fo(kappa);
  if (eta < 0.0) throw std::invalid_argument("eta must be >= 0");
  const double aa = std::fabs(sharp.alpha);
  const OmegaMomentsClosed ho = ho_moments_closed(model_of(alg), sharp, sigma);
  const FoMoments f = fo_moments(ho, aa, sharp.beta);
  return {aa - 2.0 * eta * f.e1, sharp.beta - 2.0 * eta * f.e2,
          2.0 * eta / std::sqrt(kappa) * std::sqrt(f.e0)};
}

StatePoint SEOperator::apply(const StatePoint& s) const {
  if (kind == SEKind::Population) return population(alg, s, sigma, eta);
  return gordon_map(alg, s, sigma, kappa, eta);
}

std::vector<StatePoint> iterate_se(const SEOperator& op, const StatePoint& s0,
                                   int T) {
  if (T < 0) throw std::invalid_argument("iteration count must be >= 0");
  std::vector<StatePoint> out;
  out.reserve(static_cast<std::size_t>(T) + 1);
  out.push_back(s0);
  for (int t = 0; t < T; ++t) out.push_back(op.apply(out.back()));
  return out;
}

}  // namespace gordonse
