// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "cvmp/kernels.hpp"

namespace cvmp::kernels {
namespace {

// Cody-Waite reduction by pi/4 and the minimax polynomials of the Cephes sin/cos.
constexpr double kFourOverPi = 1.27323954473516268615;
constexpr double kDP1 = 7.85398125648498535156E-1;
constexpr double kDP2 = 3.77489470793079817668E-8;
constexpr double kDP3 = 2.69515142907905952645E-15;

constexpr double kSin[6] = {1.58962301576546568060E-10, -2.50507477628578072866E-8,
                            2.75573136213857245213E-6,  -1.98412698295895385996E-4,
                            8.33333333332211858878E-3,  -1.66666666666666307295E-1};
constexpr double kCos[6] = {-1.13585365213876817300E-11, 2.08757008419747316778E-9,
                            -2.75573141792967388112E-7,  2.48015872888517045348E-5,
                            -1.38888888888730564116E-3,  4.16666666666665929218E-2};

inline __m256d polevl5(__m256d z, const double (&c)[6]) {
  __m256d acc = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 6; ++i) acc = _mm256_fmadd_pd(acc, z, _mm256_set1_pd(c[i]));
  return acc;
}

inline __m256d lane_mask(__m256i bits, long long flag) {
  const __m256i f = _mm256_set1_epi64x(flag);
  return _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(bits, f), f));
}

// Accurate to a couple of ulp for |x| well below 1e8, which covers every phase angle here.
inline void sincos4(__m256d x, __m256d& s, __m256d& c) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_andnot_pd(sign_bit, x);
  const __m256d x_sign = _mm256_and_pd(sign_bit, x);

  __m256d y = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(kFourOverPi)));
  __m128i j32 = _mm256_cvttpd_epi32(y);
  // Round odd octants up so the reduced argument lies in [-pi/4, pi/4].
  j32 = _mm_and_si128(_mm_add_epi32(j32, _mm_set1_epi32(1)), _mm_set1_epi32(~1));
  y = _mm256_cvtepi32_pd(j32);
  const __m256i j = _mm256_cvtepi32_epi64(j32);

  __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP1), ax);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP2), z);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP3), z);
  const __m256d zz = _mm256_mul_pd(z, z);

  const __m256d sin_poly = _mm256_fmadd_pd(_mm256_mul_pd(z, zz), polevl5(zz, kSin), z);
  const __m256d cos_poly =
      _mm256_fmadd_pd(_mm256_mul_pd(zz, zz), polevl5(zz, kCos),
                      _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, _mm256_set1_pd(1.0)));

  const __m256d swap = lane_mask(j, 2);
  const __m256d flip4 = lane_mask(j, 4);

  __m256d sv = _mm256_blendv_pd(sin_poly, cos_poly, swap);
  __m256d cv = _mm256_blendv_pd(cos_poly, sin_poly, swap);
  sv = _mm256_xor_pd(sv, _mm256_and_pd(flip4, sign_bit));
  sv = _mm256_xor_pd(sv, x_sign);
  cv = _mm256_xor_pd(cv, _mm256_and_pd(_mm256_xor_pd(flip4, swap), sign_bit));
  s = sv;
  c = cv;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void phase_basis_avx2(double gamma0, double gamma1, std::span<const double> u,
                      std::span<double> cos_out, std::span<double> sin_out) {
  const std::size_t n = u.size();
  const __m256d g0 = _mm256_set1_pd(gamma0);
  const __m256d g1 = _mm256_set1_pd(gamma1);
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d s, c;
    // mul then add, so the angle rounds exactly as in the scalar path
    sincos4(_mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(u.data() + t), g1), g0), s, c);
    _mm256_storeu_pd(cos_out.data() + t, c);
    _mm256_storeu_pd(sin_out.data() + t, s);
  }
  for (; t < n; ++t) {
    const double theta = gamma0 + u[t] * gamma1;
    cos_out[t] = std::cos(theta);
    sin_out[t] = std::sin(theta);
  }
}

Projection phase_projection_avx2(double gamma0, double gamma1, std::span<const double> u,
                                 std::span<const double> x, std::span<const double> yr,
                                 std::span<const double> yi) {
  const std::size_t n = u.size();
  const __m256d g0 = _mm256_set1_pd(gamma0);
  const __m256d g1 = _mm256_set1_pd(gamma1);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d s, c;
    // mul then add, so the angle rounds exactly as in the scalar path
    sincos4(_mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(u.data() + t), g1), g0), s, c);
    const __m256d proj = _mm256_fmadd_pd(c, _mm256_loadu_pd(yr.data() + t),
                                         _mm256_mul_pd(s, _mm256_loadu_pd(yi.data() + t)));
    acc0 = _mm256_add_pd(acc0, proj);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + t), proj, acc1);
  }
  Projection out{hsum(acc0), hsum(acc1)};
  for (; t < n; ++t) {
    const double theta = gamma0 + u[t] * gamma1;
    const double proj = std::cos(theta) * yr[t] + std::sin(theta) * yi[t];
    out.p0 += proj;
    out.p1 += x[t] * proj;
  }
  return out;
}

void magnitude_avx2(std::span<const double> re, std::span<const double> im,
                    std::span<double> out) {
  const std::size_t n = re.size();
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    const __m256d r = _mm256_loadu_pd(re.data() + t);
    const __m256d i = _mm256_loadu_pd(im.data() + t);
    _mm256_storeu_pd(out.data() + t,
                     _mm256_sqrt_pd(_mm256_fmadd_pd(r, r, _mm256_mul_pd(i, i))));
  }
  for (; t < n; ++t) out[t] = std::sqrt(re[t] * re[t] + im[t] * im[t]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", phase_basis_avx2, phase_projection_avx2,
                                 magnitude_avx2};
  return table;
}

}  // namespace cvmp::kernels
