#include "gordonse/scalarized_ao.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "gordonse/kernels.hpp"

namespace gordonse {

AOInstance make_ao_instance(Algorithm alg, const StatePoint& sharp,
                            double sigma, int n, int d, RngStream& rng) {
  if (n < 4) throw std::invalid_argument("ao instance needs n >= 4");
  if (d < 3) throw std::invalid_argument("ao instance needs d >= 3");
  AOInstance inst;
  inst.n = n;
  inst.d = d;
  inst.A.resize(n, 3);
  rng.fill_normal({inst.A.data(), static_cast<std::size_t>(inst.A.size())});

  // Responses and weights at the current state, using the same latent triple
  // (Z1 plays the signal coordinate).
  Eigen::VectorXd z3(n);
  rng.fill_normal({z3.data(), static_cast<std::size_t>(n)});
  Eigen::VectorXd y(n);
  const auto z1 = inst.A.col(0);
  if (model_of(alg) == ModelKind::PhaseRetrieval) {
    y = z1.cwiseAbs() + sigma * z3;
  } else {
    Eigen::VectorXd q(n);
    rng.fill_rademacher({q.data(), static_cast<std::size_t>(n)});
    y = q.cwiseProduct(z1) + sigma * z3;
  }
  Eigen::VectorXd x = sharp.alpha * inst.A.col(0) + sharp.beta * inst.A.col(1);
  inst.omega.resize(n);
  kernels::weight_apply(alg, x.data(), y.data(), inst.omega.data(),
                        static_cast<std::size_t>(n));

  // |P_perp gamma_d|_2 over the orthogonal complement of a 2-dim subspace is
  // in distribution the norm of d-2 Gaussian coordinates.
  Eigen::VectorXd gd(d);
  rng.fill_normal({gd.data(), static_cast<std::size_t>(d)});
  inst.v_n = Eigen::Vector3d(0.0, 0.0, gd.tail(d - 2).norm() / std::sqrt(n));
  return inst;
}

HoMinimizerResult ho_minimizer(const AOInstance& inst) {
  const double n = static_cast<double>(inst.n);
  const Eigen::Matrix3d gram = inst.A.transpose() * inst.A;
  const Eigen::Matrix3d gram_inv = gram.inverse();
  const Eigen::Vector3d coef = gram_inv * (inst.A.transpose() * inst.omega);
  const Eigen::VectorXd resid = inst.omega - inst.A * coef;
  const double rnorm = resid.norm() / std::sqrt(n);
  if (rnorm < 1e-12)
    throw std::runtime_error("omega lies in the span of A (zero residual)");

  const double den2 = 1.0 - n * inst.v_n.dot(gram_inv * inst.v_n);
  if (!(den2 > 0.0))
    throw std::runtime_error(
        "tau denominator radicand <= 0 (kappa too small): " +
        std::to_string(den2));

  HoMinimizerResult res;
  res.tau = rnorm / std::sqrt(den2);
  const Eigen::Vector3d xi = coef + res.tau * n * (gram_inv * inst.v_n);
  res.xi = {xi[0], xi[1], xi[2]};
  res.loss_value =
      (inst.A * xi - inst.omega).norm() / std::sqrt(n) - inst.v_n.dot(xi);
  res.negative_loss_warning = res.loss_value < 0.0;
  return res;
}

ExpandedState fo_minimizer(const AOInstance& inst, const StatePoint& sharp,
                           double eta) {
  const double n = static_cast<double>(inst.n);
  const double s = 2.0 * eta / n;
  const double a = sharp.alpha - s * inst.A.col(0).dot(inst.omega);
  const double mu = sharp.beta - s * inst.A.col(1).dot(inst.omega);
  const double perp_norm = inst.v_n[2] * std::sqrt(n);
  const double nu =
      s * (inst.A.col(2).dot(inst.omega) + perp_norm * inst.omega.norm());
  return {a, mu, nu};
}

namespace {

struct LossEval {
  double value;
  Eigen::Vector3d grad;
  double resid_norm;
};

LossEval eval_loss(const AOInstance& inst, const Eigen::Vector3d& xi) {
  const double n = static_cast<double>(inst.n);
  const Eigen::VectorXd r = inst.A * xi - inst.omega;
  const double rn = r.norm();
  LossEval e;
  e.resid_norm = rn;
  e.value = rn / std::sqrt(n) - inst.v_n.dot(xi);
  e.grad = inst.A.transpose() * r / (std::sqrt(n) * rn) - inst.v_n;
  return e;
}

}  // namespace

ExpandedState numeric_3var_check(const AOInstance& inst) {
  const double n = static_cast<double>(inst.n);
  // Least-squares coefficients are a good interior start.
  const Eigen::Matrix3d gram = inst.A.transpose() * inst.A;
  Eigen::Vector3d xi = gram.ldlt().solve(inst.A.transpose() * inst.omega);
  if (xi[2] < 0.0) xi[2] = 0.0;

  constexpr int kMaxIter = 500;
  constexpr double kTol = 1e-9;
  for (int it = 0; it < kMaxIter; ++it) {
    const LossEval e = eval_loss(inst, xi);
    // Projected gradient (nu is clamped at 0).
    Eigen::Vector3d pg = e.grad;
    const bool active = xi[2] <= 0.0 && e.grad[2] > 0.0;
    if (active) pg[2] = 0.0;
    if (pg.norm() <= kTol) return {xi[0], xi[1], xi[2]};

    // Newton direction on the free coordinates. Hessian of |r|/sqrt(n) is
    // (A^T A - (A^T r)(A^T r)^T / |r|^2) / (sqrt(n) |r|).
    const Eigen::VectorXd r = inst.A * xi - inst.omega;
    const Eigen::Vector3d atr = inst.A.transpose() * r;
    Eigen::Matrix3d hess =
        (gram - atr * atr.transpose() / (e.resid_norm * e.resid_norm)) /
        (std::sqrt(n) * e.resid_norm);
    Eigen::Vector3d step;
    if (active) {
      Eigen::Matrix2d h2 = hess.topLeftCorner<2, 2>();
      Eigen::Vector2d s2 = h2.ldlt().solve(-pg.head<2>());
      step = Eigen::Vector3d(s2[0], s2[1], 0.0);
    } else {
      step = hess.ldlt().solve(-pg);
    }
    if (!step.allFinite() || step.dot(pg) >= 0.0) step = -pg;

    // Backtracking line search with projection onto nu >= 0.
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::Vector3d cand = xi + t * step;
      if (cand[2] < 0.0) cand[2] = 0.0;
      if (eval_loss(inst, cand).value <
          e.value - 1e-4 * t * std::fabs(step.dot(pg))) {
        xi = cand;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // Step collapsed; accept if the projected gradient is already tiny.
      if (pg.norm() <= 1e-7) return {xi[0], xi[1], xi[2]};
      throw std::runtime_error("numeric minimizer: line search failed");
    }
  }
  throw std::runtime_error("numeric minimizer did not converge");
}

double hessian_min_eigenvalue(const AOInstance& inst, const ExpandedState& xi) {
  const double n = static_cast<double>(inst.n);
  const Eigen::Vector3d x(xi.alpha, xi.mu, xi.nu);
  const Eigen::VectorXd r = inst.A * x - inst.omega;
  const double rn = r.norm();
  const Eigen::Matrix3d gram = inst.A.transpose() * inst.A;
  const Eigen::Vector3d atr = inst.A.transpose() * r;
  const Eigen::Matrix3d hess =
      (gram - atr * atr.transpose() / (rn * rn)) / (std::sqrt(n) * rn);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hess);
  return es.eigenvalues().minCoeff();
}

}  // namespace gordonse
