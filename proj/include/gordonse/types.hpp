#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gordonse {

/// The four iterative updates studied by this toolkit. The tag doubles as the
/// weight-function tag: each algorithm is fully identified by its weight.
enum class Algorithm { AmPr, GdPr, AmMlr, SubgradAmMlr };

enum class ModelKind { PhaseRetrieval, MixtureOfRegressions };

enum class UpdateOrder { HigherOrder, FirstOrder };

constexpr ModelKind model_of(Algorithm a) {
  return (a == Algorithm::AmPr || a == Algorithm::GdPr)
             ? ModelKind::PhaseRetrieval
             : ModelKind::MixtureOfRegressions;
}

constexpr UpdateOrder order_of(Algorithm a) {
  return (a == Algorithm::AmPr || a == Algorithm::AmMlr)
             ? UpdateOrder::HigherOrder
             : UpdateOrder::FirstOrder;
}

constexpr Algorithm kAllAlgorithms[] = {Algorithm::AmPr, Algorithm::GdPr,
                                        Algorithm::AmMlr,
                                        Algorithm::SubgradAmMlr};

inline std::string_view name_of(Algorithm a) {
  switch (a) {
    case Algorithm::AmPr: return "am_pr";
    case Algorithm::GdPr: return "gd_pr";
    case Algorithm::AmMlr: return "am_mlr";
    case Algorithm::SubgradAmMlr: return "subgrad_am_mlr";
  }
  return "?";
}

inline std::string_view name_of(ModelKind m) {
  return m == ModelKind::PhaseRetrieval ? "phase_retrieval"
                                        : "mixture_of_regressions";
}

inline Algorithm algorithm_from_name(std::string_view s) {
  if (s == "am_pr") return Algorithm::AmPr;
  if (s == "gd_pr") return Algorithm::GdPr;
  if (s == "am_mlr") return Algorithm::AmMlr;
  if (s == "subgrad_am_mlr") return Algorithm::SubgradAmMlr;
  throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

inline ModelKind model_from_name(std::string_view s) {
  if (s == "phase_retrieval") return ModelKind::PhaseRetrieval;
  if (s == "mixture_of_regressions") return ModelKind::MixtureOfRegressions;
  throw std::invalid_argument("unknown model: " + std::string(s));
}

/// Sign convention used everywhere in this project: sign(0) = 1.
inline double sign1(double x) { return x >= 0.0 ? 1.0 : -1.0; }

/// Two-dimensional state of a parameter vector: alpha = component along the
/// ground truth, beta = norm of the orthogonal component (beta >= 0).
struct StatePoint {
  double alpha = 0.0;
  double beta = 0.0;

  /// beta / |alpha|; +infinity when alpha == 0.
  double rho() const {
    if (alpha == 0.0) return std::numeric_limits<double>::infinity();
    return beta / std::fabs(alpha);
  }

  /// Angle to the truth axis, atan(beta/|alpha|) in [0, pi/2].
  double phi() const { return std::atan2(beta, std::fabs(alpha)); }
};

/// Three-dimensional expanded state (alpha, mu, nu): component along the
/// truth, component along the previous iterate's orthogonal part, and the
/// norm of the remainder. beta is recovered as sqrt(mu^2 + nu^2).
struct ExpandedState {
  double alpha = 0.0;
  double mu = 0.0;
  double nu = 0.0;

  double beta() const { return std::hypot(mu, nu); }
};

}  // namespace gordonse
