#include "gordonse/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#define GORDONSE_X86 1
#include <immintrin.h>
#else
#define GORDONSE_X86 0
#endif

namespace gordonse::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

bool cpu_has_avx2() {
#if GORDONSE_X86 && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

// ---------------------------------------------------------------------------
// Scalar reference path.
//
// Accumulation runs in 4 interleaved lanes (element i lands in lane i % 4)
// with a scalar tail, matching the AVX2 path operation for operation, so the
// two produce bit-identical sums.
// ---------------------------------------------------------------------------

template <Algorithm W>
inline double weight_one(double x, double y) {
  if constexpr (W == Algorithm::AmPr) {
    return sign1(x) * y;
  } else if constexpr (W == Algorithm::GdPr) {
    return x - sign1(x) * y;
  } else if constexpr (W == Algorithm::AmMlr) {
    return sign1(x * y) * y;
  } else {
    return x - sign1(x * y) * y;
  }
}

template <ModelKind M>
inline double link_one(double z1, double z3, double q, double sigma) {
  if constexpr (M == ModelKind::PhaseRetrieval) {
    (void)q;
    return std::fabs(z1) + sigma * z3;
  } else {
    return q * z1 + sigma * z3;
  }
}

struct LaneAcc {
  double sum[3][4] = {};
  double sq[6][4] = {};  // (00, 01, 02, 11, 12, 22)
  double maxw[4] = {};

  template <Algorithm W, ModelKind M>
  inline void add(int lane, double z1, double z2, double z3, double q,
                  double alpha, double beta, double sigma) {
    const double x = alpha * z1 + beta * z2;
    const double y = link_one<M>(z1, z3, q, sigma);
    const double w = weight_one<W>(x, y);
    const double w2 = w * w;
    const double z1w = z1 * w;
    const double z2w = z2 * w;
    sum[0][lane] += w2;
    sum[1][lane] += z1w;
    sum[2][lane] += z2w;
    sq[0][lane] += w2 * w2;
    sq[1][lane] += w2 * z1w;
    sq[2][lane] += w2 * z2w;
    sq[3][lane] += z1w * z1w;
    sq[4][lane] += z1w * z2w;
    sq[5][lane] += z2w * z2w;
    maxw[lane] = std::max(maxw[lane], std::fabs(w));
  }

  // Fixed reduction order shared with the AVX2 path.
  static double reduce(const double l[4]) { return (l[0] + l[1]) + (l[2] + l[3]); }

  void finish(MomentSums& acc) const {
    static constexpr int kPair[6][2] = {{0, 0}, {0, 1}, {0, 2},
                                        {1, 1}, {1, 2}, {2, 2}};
    for (int i = 0; i < 3; ++i) acc.sum[i] += reduce(sum[i]);
    for (int k = 0; k < 6; ++k) {
      const double v = reduce(sq[k]);
      acc.sumsq[kPair[k][0]][kPair[k][1]] += v;
      if (kPair[k][0] != kPair[k][1]) acc.sumsq[kPair[k][1]][kPair[k][0]] += v;
    }
    acc.max_abs_w = std::max(
        acc.max_abs_w, std::max(std::max(maxw[0], maxw[1]), std::max(maxw[2], maxw[3])));
  }
};

template <Algorithm W, ModelKind M>
inline void tail_moments(const double* z1, const double* z2, const double* z3,
                         const double* q, std::size_t begin, std::size_t n,
                         double alpha, double beta, double sigma,
                         MomentSums& acc) {
  for (std::size_t i = begin; i < n; ++i) {
    const double qi = q ? q[i] : 1.0;
    const double x = alpha * z1[i] + beta * z2[i];
    const double y = link_one<M>(z1[i], z3[i], qi, sigma);
    const double w = weight_one<W>(x, y);
    const double w2 = w * w;
    const double z1w = z1[i] * w;
    const double z2w = z2[i] * w;
    acc.sum[0] += w2;
    acc.sum[1] += z1w;
    acc.sum[2] += z2w;
    acc.sumsq[0][0] += w2 * w2;
    acc.sumsq[0][1] += w2 * z1w;
    acc.sumsq[1][0] += w2 * z1w;
    acc.sumsq[0][2] += w2 * z2w;
    acc.sumsq[2][0] += w2 * z2w;
    acc.sumsq[1][1] += z1w * z1w;
    acc.sumsq[1][2] += z1w * z2w;
    acc.sumsq[2][1] += z1w * z2w;
    acc.sumsq[2][2] += z2w * z2w;
    acc.max_abs_w = std::max(acc.max_abs_w, std::fabs(w));
  }
}

template <Algorithm W, ModelKind M>
void scalar_omega_moments(const double* z1, const double* z2, const double* z3,
                          const double* q, std::size_t n, double alpha,
                          double beta, double sigma, MomentSums& acc) {
  LaneAcc lanes;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (int l = 0; l < 4; ++l) {
      const double qi = q ? q[i + l] : 1.0;
      lanes.add<W, M>(l, z1[i + l], z2[i + l], z3[i + l], qi, alpha, beta,
                      sigma);
    }
  }
  lanes.finish(acc);
  tail_moments<W, M>(z1, z2, z3, q, n4, n, alpha, beta, sigma, acc);
  acc.count += n;
}

template <Algorithm W>
void scalar_weight_apply(const double* x, const double* y, double* out,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = weight_one<W>(x[i], y[i]);
}

// ---------------------------------------------------------------------------
// AVX2 path.
// ---------------------------------------------------------------------------
#if GORDONSE_X86

#define GORDONSE_AVX2 __attribute__((target("avx2")))

GORDONSE_AVX2 inline __m256d sign1_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d neg = _mm256_set1_pd(-1.0);
  const __m256d mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GE_OQ);
  return _mm256_blendv_pd(neg, one, mask);
}

GORDONSE_AVX2 inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

template <Algorithm W>
GORDONSE_AVX2 inline __m256d weight_pd(__m256d x, __m256d y) {
  if constexpr (W == Algorithm::AmPr) {
    return _mm256_mul_pd(sign1_pd(x), y);
  } else if constexpr (W == Algorithm::GdPr) {
    return _mm256_sub_pd(x, _mm256_mul_pd(sign1_pd(x), y));
  } else if constexpr (W == Algorithm::AmMlr) {
    return _mm256_mul_pd(sign1_pd(_mm256_mul_pd(x, y)), y);
  } else {
    return _mm256_sub_pd(x, _mm256_mul_pd(sign1_pd(_mm256_mul_pd(x, y)), y));
  }
}

template <Algorithm W, ModelKind M>
GORDONSE_AVX2 void avx2_omega_moments(const double* z1, const double* z2,
                                      const double* z3, const double* q,
                                      std::size_t n, double alpha, double beta,
                                      double sigma, MomentSums& acc) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vs = _mm256_set1_pd(sigma);
  __m256d sum0 = _mm256_setzero_pd(), sum1 = sum0, sum2 = sum0;
  __m256d q00 = sum0, q01 = sum0, q02 = sum0, q11 = sum0, q12 = sum0,
          q22 = sum0;
  __m256d mx = sum0;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d vz1 = _mm256_loadu_pd(z1 + i);
    const __m256d vz2 = _mm256_loadu_pd(z2 + i);
    const __m256d vz3 = _mm256_loadu_pd(z3 + i);
    const __m256d x =
        _mm256_add_pd(_mm256_mul_pd(va, vz1), _mm256_mul_pd(vb, vz2));
    __m256d y;
    if constexpr (M == ModelKind::PhaseRetrieval) {
      y = _mm256_add_pd(abs_pd(vz1), _mm256_mul_pd(vs, vz3));
    } else {
      const __m256d vq = _mm256_loadu_pd(q + i);
      y = _mm256_add_pd(_mm256_mul_pd(vq, vz1), _mm256_mul_pd(vs, vz3));
    }
    const __m256d w = weight_pd<W>(x, y);
    const __m256d w2 = _mm256_mul_pd(w, w);
    const __m256d z1w = _mm256_mul_pd(vz1, w);
    const __m256d z2w = _mm256_mul_pd(vz2, w);
    sum0 = _mm256_add_pd(sum0, w2);
    sum1 = _mm256_add_pd(sum1, z1w);
    sum2 = _mm256_add_pd(sum2, z2w);
    q00 = _mm256_add_pd(q00, _mm256_mul_pd(w2, w2));
    q01 = _mm256_add_pd(q01, _mm256_mul_pd(w2, z1w));
    q02 = _mm256_add_pd(q02, _mm256_mul_pd(w2, z2w));
    q11 = _mm256_add_pd(q11, _mm256_mul_pd(z1w, z1w));
    q12 = _mm256_add_pd(q12, _mm256_mul_pd(z1w, z2w));
    q22 = _mm256_add_pd(q22, _mm256_mul_pd(z2w, z2w));
    mx = _mm256_max_pd(mx, abs_pd(w));
  }
  LaneAcc lanes;
  _mm256_storeu_pd(lanes.sum[0], sum0);
  _mm256_storeu_pd(lanes.sum[1], sum1);
  _mm256_storeu_pd(lanes.sum[2], sum2);
  _mm256_storeu_pd(lanes.sq[0], q00);
  _mm256_storeu_pd(lanes.sq[1], q01);
  _mm256_storeu_pd(lanes.sq[2], q02);
  _mm256_storeu_pd(lanes.sq[3], q11);
  _mm256_storeu_pd(lanes.sq[4], q12);
  _mm256_storeu_pd(lanes.sq[5], q22);
  _mm256_storeu_pd(lanes.maxw, mx);
  lanes.finish(acc);
  tail_moments<W, M>(z1, z2, z3, q, n4, n, alpha, beta, sigma, acc);
  acc.count += n;
}

template <Algorithm W>
GORDONSE_AVX2 void avx2_weight_apply(const double* x, const double* y,
                                     double* out, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(out + i, weight_pd<W>(vx, vy));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = weight_one<W>(x[i], y[i]);
}

#endif  // GORDONSE_X86

bool use_avx2() { return cpu_has_avx2() && !g_force_scalar.load(); }

template <Algorithm W, ModelKind M>
void dispatch_moments(const double* z1, const double* z2, const double* z3,
                      const double* q, std::size_t n, double alpha, double beta,
                      double sigma, MomentSums& acc) {
#if GORDONSE_X86
  if (use_avx2()) {
    avx2_omega_moments<W, M>(z1, z2, z3, q, n, alpha, beta, sigma, acc);
    return;
  }
#endif
  scalar_omega_moments<W, M>(z1, z2, z3, q, n, alpha, beta, sigma, acc);
}

template <Algorithm W>
void dispatch_weight(const double* x, const double* y, double* out,
                     std::size_t n) {
#if GORDONSE_X86
  if (use_avx2()) {
    avx2_weight_apply<W>(x, y, out, n);
    return;
  }
#endif
  scalar_weight_apply<W>(x, y, out, n);
}

}  // namespace

void MomentSums::merge(const MomentSums& o) {
  for (int i = 0; i < 3; ++i) sum[i] += o.sum[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sumsq[i][j] += o.sumsq[i][j];
  max_abs_w = std::max(max_abs_w, o.max_abs_w);
  count += o.count;
}

double MomentSums::cov(int i, int j) const {
  const double n = static_cast<double>(count);
  return (sumsq[i][j] - sum[i] * sum[j] / n) / (n - 1.0);
}

double MomentSums::stderr_mean(int i) const {
  return std::sqrt(std::max(cov(i, i), 0.0) / static_cast<double>(count));
}

void omega_moments(Algorithm alg, const double* z1, const double* z2,
                   const double* z3, const double* q, std::size_t n,
                   double alpha, double beta, double sigma, MomentSums& acc) {
  switch (alg) {
    case Algorithm::AmPr:
      dispatch_moments<Algorithm::AmPr, ModelKind::PhaseRetrieval>(
          z1, z2, z3, q, n, alpha, beta, sigma, acc);
      break;
    case Algorithm::GdPr:
      dispatch_moments<Algorithm::GdPr, ModelKind::PhaseRetrieval>(
          z1, z2, z3, q, n, alpha, beta, sigma, acc);
      break;
    case Algorithm::AmMlr:
      dispatch_moments<Algorithm::AmMlr, ModelKind::MixtureOfRegressions>(
          z1, z2, z3, q, n, alpha, beta, sigma, acc);
      break;
    case Algorithm::SubgradAmMlr:
      dispatch_moments<Algorithm::SubgradAmMlr,
                       ModelKind::MixtureOfRegressions>(z1, z2, z3, q, n,
                                                        alpha, beta, sigma,
                                                        acc);
      break;
  }
}

void weight_apply(Algorithm alg, const double* x, const double* y, double* out,
                  std::size_t n) {
  switch (alg) {
    case Algorithm::AmPr: dispatch_weight<Algorithm::AmPr>(x, y, out, n); break;
    case Algorithm::GdPr: dispatch_weight<Algorithm::GdPr>(x, y, out, n); break;
    case Algorithm::AmMlr:
      dispatch_weight<Algorithm::AmMlr>(x, y, out, n);
      break;
    case Algorithm::SubgradAmMlr:
      dispatch_weight<Algorithm::SubgradAmMlr>(x, y, out, n);
      break;
  }
}

bool have_avx2() { return cpu_has_avx2(); }

const char* active_isa() { return use_avx2() ? "avx2" : "scalar"; }

void force_scalar(bool on) { g_force_scalar.store(on); }

}  // namespace gordonse::kernels
