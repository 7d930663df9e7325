#include "gordonse/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gordonse/parallel.hpp"
#include "gordonse/rng.hpp"

namespace gordonse {

namespace {

constexpr std::uint64_t kShardSize = 1 << 16;

kernels::MomentSums accumulate(const OmegaSpec& spec, std::uint64_t samples,
                               std::uint64_t seed, int threads) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const bool mlr = model_of(spec.alg) == ModelKind::MixtureOfRegressions;
  const std::uint64_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<kernels::MomentSums> partial(shards);

  parallel_for(shards, threads, [&](std::size_t s) {
    const std::uint64_t begin = s * kShardSize;
    const std::size_t count =
        static_cast<std::size_t>(std::min(kShardSize, samples - begin));
    RngStream rng(seed, StreamRole::OracleShard, s);
    std::vector<double> z1(count), z2(count), z3(count), q;
    rng.fill_normal(z1);
    rng.fill_normal(z2);
    rng.fill_normal(z3);
    const double* qp = nullptr;
    if (mlr) {
      q.resize(count);
      rng.fill_rademacher(q);
      qp = q.data();
    }
    kernels::omega_moments(spec.alg, z1.data(), z2.data(), z3.data(), qp,
                           count, spec.state.alpha, spec.state.beta,
                           spec.sigma, partial[s]);
  });

  kernels::MomentSums total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

OracleEstimate to_estimate(const kernels::MomentSums& m) {
  OracleEstimate e;
  e.samples = m.count;
  e.e_omega2 = m.mean(0);
  e.e_z1_omega = m.mean(1);
  e.e_z2_omega = m.mean(2);
  e.se_omega2 = m.stderr_mean(0);
  e.se_z1_omega = m.stderr_mean(1);
  e.se_z2_omega = m.stderr_mean(2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e.cov[i][j] = m.cov(i, j);
  e.max_abs_omega = m.max_abs_w;
  return e;
}

// Variance of a smooth function g of the three means, by the delta method:
// grad^T Cov grad / N.
double delta_var(const OracleEstimate& e, const double grad[3]) {
  double v = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v += grad[i] * e.cov[i][j] * grad[j];
  return std::max(v, 0.0) / static_cast<double>(e.samples);
}

}  // namespace

OracleEstimate estimate_expectations(const OmegaSpec& spec,
                                     std::uint64_t samples, std::uint64_t seed,
                                     int threads) {
  return to_estimate(accumulate(spec, samples, seed, threads));
}

AssumptionReport verify_assumptions(const OmegaSpec& spec,
                                    std::uint64_t samples, std::uint64_t seed,
                                    int threads) {
  const OracleEstimate e = estimate_expectations(spec, samples, seed, threads);
  AssumptionReport rep;
  rep.samples = e.samples;
  rep.lb_value = e.e_omega2 - e.e_z1_omega * e.e_z1_omega -
                 e.e_z2_omega * e.e_z2_omega;
  const double grad[3] = {1.0, -2.0 * e.e_z1_omega, -2.0 * e.e_z2_omega};
  rep.lb_stderr = std::sqrt(delta_var(e, grad));
  rep.max_abs_omega = e.max_abs_omega;
  rep.tail_ratio =
      e.max_abs_omega / std::sqrt(2.0 * std::log(static_cast<double>(samples)));
  return rep;
}

OracleExpanded gordon_from_oracle(const OmegaSpec& spec, double kappa,
                                  UpdateOrder order, double eta,
                                  std::uint64_t samples, std::uint64_t seed,
                                  int threads) {
  OracleExpanded out;
  const OracleEstimate e = estimate_expectations(spec, samples, seed, threads);
  out.raw = e;

  if (order == UpdateOrder::HigherOrder) {
    if (!(kappa > 1.0))
      throw std::invalid_argument("higher-order update requires kappa > 1");
    const double h = e.e_omega2 - e.e_z1_omega * e.e_z1_omega -
                     e.e_z2_omega * e.e_z2_omega;
    const double grad_h[3] = {1.0, -2.0 * e.e_z1_omega, -2.0 * e.e_z2_omega};
    const double se_h = std::sqrt(delta_var(e, grad_h));
    if (h < -4.0 * se_h)
      throw std::runtime_error(
          "negative radicand in nu beyond 4 stderr (estimate " +
          std::to_string(h) + ", stderr " + std::to_string(se_h) + ")");
    const double rad = std::max(h, 0.0) / (kappa - 1.0);
    out.state = {e.e_z1_omega, e.e_z2_omega, std::sqrt(rad)};
    out.se_alpha = e.se_z1_omega;
    out.se_mu = e.se_z2_omega;
    // d nu / d (means) = grad_h / (2 nu (kappa-1)); guard the nu = 0 case.
    const double nu = out.state.nu;
    if (nu > 0.0) {
      const double scale = 1.0 / (2.0 * nu * (kappa - 1.0));
      const double grad_nu[3] = {grad_h[0] * scale, grad_h[1] * scale,
                                 grad_h[2] * scale};
      out.se_nu = std::sqrt(delta_var(e, grad_nu));
    } else {
      out.se_nu = std::sqrt(se_h / (kappa - 1.0));
    }
    return out;
  }

  if (!(kappa > 0.0))
    throw std::invalid_argument("first-order update requires kappa > 0");
  if (eta < 0.0) throw std::invalid_argument("eta must be >= 0");
  const double a = spec.state.alpha;
  const double b = spec.state.beta;
  out.state.alpha = a - 2.0 * eta * e.e_z1_omega;
  out.state.mu = b - 2.0 * eta * e.e_z2_omega;
  out.state.nu =
      2.0 * eta / std::sqrt(kappa) * std::sqrt(std::max(e.e_omega2, 0.0));
  out.se_alpha = 2.0 * eta * e.se_z1_omega;
  out.se_mu = 2.0 * eta * e.se_z2_omega;
  if (e.e_omega2 > 0.0) {
    const double grad_nu0 =
        eta / (std::sqrt(kappa) * std::sqrt(e.e_omega2));
    const double grad_nu[3] = {grad_nu0, 0.0, 0.0};
    out.se_nu = std::sqrt(delta_var(e, grad_nu));
  }
  return out;
}

}  // namespace gordonse
