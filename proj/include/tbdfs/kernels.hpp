#pragma once

#include <cstddef>

// Dense f64 inner loops behind a runtime-dispatched table. Every variant of a
// kernel performs the identical sequence of IEEE operations per output element
// (lane-parallel mul/add, no FMA, same accumulation order), so switching
// variants never changes results at the bit level. Equivalence tests assert
// exactly that.

namespace tbdfs::kern {

using EwBinaryFn = void (*)(const double*, const double*, double*, std::size_t);
using ScaleFn = void (*)(const double*, double, double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
// C[m x n] = A[m x k] * B[k x n], row-major; `acc` adds into C instead of
// overwriting it.
using MatmulFn = void (*)(const double*, const double*, double*, std::size_t,
                          std::size_t, std::size_t, bool acc);

struct KernelTable {
  const char* name;
  EwBinaryFn add;
  EwBinaryFn sub;
  EwBinaryFn mul;
  ScaleFn scale;
  AxpyFn axpy;
  MatmulFn matmul;
};

const KernelTable& scalar_table();

#if defined(TBDFS_KERNELS_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(TBDFS_KERNELS_NEON)
const KernelTable& neon_table();
#endif

bool cpu_has_avx2();

// Best table for this CPU; pinned on first use. force_scalar() must be called
// before any kernel runs (tests and the --no-simd CLI flag do).
const KernelTable& active();
void force_scalar(bool on);

}  // namespace tbdfs::kern
