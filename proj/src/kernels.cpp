#include "cvmp/kernels.hpp"

#include <cstdlib>
#include <string>

namespace cvmp::kernels {

#ifdef CVMP_HAVE_AVX2
const KernelTable& avx2_table();
#endif

bool cpu_supports_avx2() {
#if defined(CVMP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* avx2() {
#ifdef CVMP_HAVE_AVX2
  if (cpu_supports_avx2()) return &avx2_table();
#endif
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& chosen = []() -> const KernelTable& {
    const char* env = std::getenv("CVMP_KERNEL");
    const std::string pick = env ? env : "auto";
    if (pick == "scalar") return scalar();
    if (const KernelTable* vec = avx2()) return *vec;
    return scalar();
  }();
  return chosen;
}

}  // namespace cvmp::kernels
