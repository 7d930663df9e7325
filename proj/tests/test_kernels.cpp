#include <doctest.h>

#include <cstring>
#include <vector>

#include "gordonse/kernels.hpp"
#include "gordonse/rng.hpp"

using namespace gordonse;

namespace {

struct Inputs {
  std::vector<double> z1, z2, z3, q, x, y;
};

Inputs random_inputs(std::size_t n, std::uint64_t seed) {
  Inputs in;
  RngStream rng(seed, StreamRole::Misc);
  in.z1.resize(n);
  in.z2.resize(n);
  in.z3.resize(n);
  in.q.resize(n);
  in.x.resize(n);
  in.y.resize(n);
  rng.fill_normal(in.z1);
  rng.fill_normal(in.z2);
  rng.fill_normal(in.z3);
  rng.fill_rademacher(in.q);
  rng.fill_normal(in.x);
  rng.fill_normal(in.y);
  return in;
}

}  // namespace

TEST_CASE("weight functions and the sign(0) = 1 convention") {
  CHECK(kernels::weight_scalar(Algorithm::AmPr, 0.0, 3.5) == 3.5);
  CHECK(kernels::weight_scalar(Algorithm::AmPr, -2.0, 3.5) == -3.5);
  CHECK(kernels::weight_scalar(Algorithm::GdPr, 0.0, 3.5) == -3.5);
  CHECK(kernels::weight_scalar(Algorithm::AmMlr, 1.0, -2.0) == 2.0);
  CHECK(kernels::weight_scalar(Algorithm::SubgradAmMlr, 1.0, -2.0) == -1.0);
  CHECK(kernels::weight_scalar(Algorithm::AmMlr, 0.0, -2.0) == -2.0);
}

TEST_CASE("first-order weight equals x minus the higher-order weight") {
  // Pointwise on a 10^4-point grid, exactly.
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double x = -5.0 + 0.1 * i + 0.0037;
      const double y = -5.0 + 0.1 * j + 0.0011;
      CHECK(kernels::weight_scalar(Algorithm::GdPr, x, y) ==
            x - kernels::weight_scalar(Algorithm::AmPr, x, y));
      CHECK(kernels::weight_scalar(Algorithm::SubgradAmMlr, x, y) ==
            x - kernels::weight_scalar(Algorithm::AmMlr, x, y));
    }
  }
}

TEST_CASE("weight_apply matches the scalar definition") {
  const auto in = random_inputs(1001, 5);  // odd length exercises the tail
  std::vector<double> out(in.x.size());
  for (Algorithm alg : kAllAlgorithms) {
    kernels::weight_apply(alg, in.x.data(), in.y.data(), out.data(),
                          in.x.size());
    for (std::size_t i = 0; i < in.x.size(); ++i)
      CHECK(out[i] == kernels::weight_scalar(alg, in.x[i], in.y[i]));
  }
}

TEST_CASE("scalar and SIMD moment kernels are bit-identical") {
  if (!kernels::have_avx2()) {
    MESSAGE("avx2 unavailable; dispatch is scalar-only on this host");
    return;
  }
  for (std::size_t n : {std::size_t{64}, std::size_t{1003}, std::size_t{4096}}) {
    const auto in = random_inputs(n, 17 + n);
    for (Algorithm alg : kAllAlgorithms) {
      const bool mlr = model_of(alg) == ModelKind::MixtureOfRegressions;
      kernels::MomentSums fast, ref;
      kernels::force_scalar(false);
      kernels::omega_moments(alg, in.z1.data(), in.z2.data(), in.z3.data(),
                             mlr ? in.q.data() : nullptr, n, 0.7, 0.6, 0.3,
                             fast);
      kernels::force_scalar(true);
      kernels::omega_moments(alg, in.z1.data(), in.z2.data(), in.z3.data(),
                             mlr ? in.q.data() : nullptr, n, 0.7, 0.6, 0.3,
                             ref);
      kernels::force_scalar(false);
      CHECK(fast.count == ref.count);
      CHECK(fast.max_abs_w == ref.max_abs_w);
      for (int i = 0; i < 3; ++i) {
        CHECK(fast.sum[i] == ref.sum[i]);
        for (int j = 0; j < 3; ++j) CHECK(fast.sumsq[i][j] == ref.sumsq[i][j]);
      }
    }
  }
}

TEST_CASE("scalar and SIMD weight_apply are bit-identical") {
  if (!kernels::have_avx2()) return;
  const auto in = random_inputs(777, 23);
  std::vector<double> fast(in.x.size()), ref(in.x.size());
  for (Algorithm alg : kAllAlgorithms) {
    kernels::force_scalar(false);
    kernels::weight_apply(alg, in.x.data(), in.y.data(), fast.data(),
                          in.x.size());
    kernels::force_scalar(true);
    kernels::weight_apply(alg, in.x.data(), in.y.data(), ref.data(),
                          in.x.size());
    kernels::force_scalar(false);
    CHECK(std::memcmp(fast.data(), ref.data(),
                      sizeof(double) * fast.size()) == 0);
  }
}

TEST_CASE("moment sums merge and summary statistics") {
  const auto in = random_inputs(2000, 99);
  kernels::MomentSums whole, a, b;
  kernels::omega_moments(Algorithm::AmPr, in.z1.data(), in.z2.data(),
                         in.z3.data(), nullptr, 2000, 0.6, 0.8, 0.0, whole);
  kernels::omega_moments(Algorithm::AmPr, in.z1.data(), in.z2.data(),
                         in.z3.data(), nullptr, 1000, 0.6, 0.8, 0.0, a);
  kernels::omega_moments(Algorithm::AmPr, in.z1.data() + 1000,
                         in.z2.data() + 1000, in.z3.data() + 1000, nullptr,
                         1000, 0.6, 0.8, 0.0, b);
  a.merge(b);
  CHECK(a.count == whole.count);
  for (int i = 0; i < 3; ++i)
    CHECK(a.mean(i) == doctest::Approx(whole.mean(i)).epsilon(1e-13));
  CHECK(whole.stderr_mean(0) > 0.0);
  CHECK(whole.cov(0, 1) == whole.cov(1, 0));
}
