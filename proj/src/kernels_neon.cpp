// NEON f64 variants for aarch64. Same policy as the AVX2 file: separate
// mul/add, scalar-identical accumulation order.

#include <arm_neon.h>

#include "tbdfs/kernels.hpp"

namespace tbdfs::kern {
namespace {

void add_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_neon(const double* a, double s, double* out, std::size_t n) {
  const float64x2_t sv = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), sv));
  }
  for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(av, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void matmul_neon(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool acc) {
  if (!acc) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const float64x2_t aik = vdupq_n_f64(arow[kk]);
      const double* brow = b + kk * n;
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        float64x2_t prod = vmulq_f64(aik, vld1q_f64(brow + j));
        vst1q_f64(crow + j, vaddq_f64(vld1q_f64(crow + j), prod));
      }
      for (; j < n; ++j) crow[j] = crow[j] + arow[kk] * brow[j];
    }
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{"neon",     add_neon,  sub_neon,
                                 mul_neon,   scale_neon, axpy_neon,
                                 matmul_neon};
  return table;
}

}  // namespace tbdfs::kern
