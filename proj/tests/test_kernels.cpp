#include <doctest.h>

#include <vector>

#include "tbdfs/kernels.hpp"
#include "tbdfs/rng.hpp"

using namespace tbdfs;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return v;
}

const kern::KernelTable& simd_table() {
#if defined(TBDFS_KERNELS_AVX2)
  if (kern::cpu_has_avx2()) return kern::avx2_table();
#endif
#if defined(TBDFS_KERNELS_NEON)
  return kern::neon_table();
#endif
  return kern::scalar_table();
}

}  // namespace

TEST_CASE("elementwise kernels are bit-exact across variants") {
  const auto& scalar = kern::scalar_table();
  const auto& simd = simd_table();
  Rng rng(7);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 64u,
                        65u, 100u, 1000u}) {
    std::vector<double> a = random_vec(n, rng);
    std::vector<double> b = random_vec(n, rng);
    std::vector<double> r1(n), r2(n);

    scalar.add(a.data(), b.data(), r1.data(), n);
    simd.add(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);

    scalar.sub(a.data(), b.data(), r1.data(), n);
    simd.sub(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);

    scalar.mul(a.data(), b.data(), r1.data(), n);
    simd.mul(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);

    scalar.scale(a.data(), 1.7, r1.data(), n);
    simd.scale(a.data(), 1.7, r2.data(), n);
    CHECK(r1 == r2);

    std::vector<double> y1 = b, y2 = b;
    scalar.axpy(-0.37, a.data(), y1.data(), n);
    simd.axpy(-0.37, a.data(), y2.data(), n);
    CHECK(y1 == y2);
  }
}

TEST_CASE("matmul kernels are bit-exact across variants") {
  const auto& scalar = kern::scalar_table();
  const auto& simd = simd_table();
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + rng.below(9);
    const std::size_t k = 1 + rng.below(9);
    const std::size_t n = 1 + rng.below(17);
    std::vector<double> a = random_vec(m * k, rng);
    std::vector<double> b = random_vec(k * n, rng);
    std::vector<double> c1(m * n), c2(m * n);
    scalar.matmul(a.data(), b.data(), c1.data(), m, k, n, false);
    simd.matmul(a.data(), b.data(), c2.data(), m, k, n, false);
    CHECK(c1 == c2);

    std::vector<double> acc1 = random_vec(m * n, rng);
    std::vector<double> acc2 = acc1;
    scalar.matmul(a.data(), b.data(), acc1.data(), m, k, n, true);
    simd.matmul(a.data(), b.data(), acc2.data(), m, k, n, true);
    CHECK(acc1 == acc2);
  }
}

TEST_CASE("matmul matches a naive triple loop") {
  Rng rng(3);
  const std::size_t m = 5, k = 7, n = 4;
  std::vector<double> a = random_vec(m * k, rng);
  std::vector<double> b = random_vec(k * n, rng);
  std::vector<double> c(m * n);
  kern::active().matmul(a.data(), b.data(), c.data(), m, k, n, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) s += a[i * k + kk] * b[kk * n + j];
      CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("identity and 1x1 matmul") {
  std::vector<double> eye = {1, 0, 0, 1};
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> out(4);
  kern::active().matmul(eye.data(), x.data(), out.data(), 2, 2, 2, false);
  CHECK(out == x);

  std::vector<double> a = {2}, b = {3}, c(1);
  kern::active().matmul(a.data(), b.data(), c.data(), 1, 1, 1, false);
  CHECK(c[0] == 6.0);
}

TEST_CASE("force_scalar pins the dispatch") {
  kern::force_scalar(true);
  CHECK(std::string(kern::active().name) == "scalar");
  kern::force_scalar(false);
}
