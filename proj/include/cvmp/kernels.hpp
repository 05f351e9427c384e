#pragma once

// Data-parallel inner loops of the polar model. Every kernel has a scalar reference
// implementation; an AVX2/FMA variant is compiled when the toolchain supports it and selected at
// runtime when the CPU does. CVMP_KERNEL=scalar|avx2 overrides the choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace cvmp::kernels {

// p0 = sum_t (c_t yR_t + s_t yI_t),  p1 = sum_t x_t (c_t yR_t + s_t yI_t)
// with c_t, s_t = cos/sin(g0 + u_t g1). These are a'y and (x* .* a)'y.
struct Projection {
  double p0 = 0.0;
  double p1 = 0.0;
};

struct KernelTable {
  std::string_view name;
  void (*phase_basis)(double gamma0, double gamma1, std::span<const double> u,
                      std::span<double> cos_out, std::span<double> sin_out);
  Projection (*phase_projection)(double gamma0, double gamma1, std::span<const double> u,
                                 std::span<const double> x, std::span<const double> yr,
                                 std::span<const double> yi);
  void (*magnitude)(std::span<const double> re, std::span<const double> im,
                    std::span<double> out);
};

const KernelTable& scalar();
// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2();
// Process-wide selection, resolved once.
const KernelTable& active();

bool cpu_supports_avx2();

}  // namespace cvmp::kernels
