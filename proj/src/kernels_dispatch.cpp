#include <atomic>

#include "tbdfs/kernels.hpp"

namespace tbdfs::kern {

namespace {
std::atomic<bool> g_force_scalar{false};
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

void force_scalar(bool on) { g_force_scalar.store(on); }

const KernelTable& active() {
  if (g_force_scalar.load()) return scalar_table();
#if defined(TBDFS_KERNELS_AVX2)
  static const bool has_avx2 = cpu_has_avx2();
  if (has_avx2) return avx2_table();
#endif
#if defined(TBDFS_KERNELS_NEON)
  return neon_table();
#endif
  return scalar_table();
}

}  // namespace tbdfs::kern
