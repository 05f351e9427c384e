#include <cmath>

#include "cvmp/kernels.hpp"

namespace cvmp::kernels {
namespace {

void phase_basis_scalar(double gamma0, double gamma1, std::span<const double> u,
                        std::span<double> cos_out, std::span<double> sin_out) {
  for (std::size_t t = 0; t < u.size(); ++t) {
    const double theta = gamma0 + u[t] * gamma1;
    cos_out[t] = std::cos(theta);
    sin_out[t] = std::sin(theta);
  }
}

Projection phase_projection_scalar(double gamma0, double gamma1, std::span<const double> u,
                                   std::span<const double> x, std::span<const double> yr,
                                   std::span<const double> yi) {
  Projection out;
  for (std::size_t t = 0; t < u.size(); ++t) {
    const double theta = gamma0 + u[t] * gamma1;
    const double proj = std::cos(theta) * yr[t] + std::sin(theta) * yi[t];
    out.p0 += proj;
    out.p1 += x[t] * proj;
  }
  return out;
}

void magnitude_scalar(std::span<const double> re, std::span<const double> im,
                      std::span<double> out) {
  for (std::size_t t = 0; t < re.size(); ++t) out[t] = std::sqrt(re[t] * re[t] + im[t] * im[t]);
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", phase_basis_scalar, phase_projection_scalar,
                                 magnitude_scalar};
  return table;
}

}  // namespace cvmp::kernels
