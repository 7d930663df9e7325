#pragma once

#include <cstddef>
#include <cstdint>

#include "gordonse/types.hpp"

namespace gordonse::kernels {

/// Accumulated moments of the per-sample triple v = (w^2, z1*w, z2*w), where
/// w = omega(alpha*z1 + beta*z2, link(z1; q) + sigma*z3). Tracks first
/// moments, all second-moment products (for standard errors and covariances)
/// and the largest |w| seen.
struct MomentSums {
  double sum[3] = {0, 0, 0};
  double sumsq[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};  // products v_i*v_j
  double max_abs_w = 0.0;
  std::uint64_t count = 0;

  void merge(const MomentSums& o);
  double mean(int i) const { return sum[i] / static_cast<double>(count); }
  /// Unbiased sample covariance of v_i and v_j.
  double cov(int i, int j) const;
  /// Standard error of mean(i).
  double stderr_mean(int i) const;
};

/// Accumulates omega moments over a block of Gaussian samples. `q` holds the
/// +-1 latent labels and may be null for phase retrieval. Scalar and AVX2
/// paths produce bit-identical sums (lane-blocked accumulation, no FMA).
void omega_moments(Algorithm alg, const double* z1, const double* z2,
                   const double* z3, const double* q, std::size_t n,
                   double alpha, double beta, double sigma, MomentSums& acc);

/// out[i] = omega(x[i], y[i]) for the given algorithm's weight function,
/// with the convention sign(0) = 1.
void weight_apply(Algorithm alg, const double* x, const double* y, double* out,
                  std::size_t n);

/// Scalar weight evaluation (the reference definition the kernels vectorize).
inline double weight_scalar(Algorithm alg, double x, double y) {
  switch (alg) {
    case Algorithm::AmPr: return sign1(x) * y;
    case Algorithm::GdPr: return x - sign1(x) * y;
    case Algorithm::AmMlr: return sign1(x * y) * y;
    case Algorithm::SubgradAmMlr: return x - sign1(x * y) * y;
  }
  return 0.0;
}

/// True if the AVX2 path is compiled in and supported by this CPU.
bool have_avx2();

/// Name of the dispatch target in use ("avx2" or "scalar").
const char* active_isa();

/// Test hook: force the scalar reference path regardless of CPU support.
void force_scalar(bool on);

}  // namespace gordonse::kernels
