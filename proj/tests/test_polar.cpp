#include <doctest.h>

#include <cmath>

#include "cvmp/error.hpp"
#include "cvmp/kernels.hpp"
#include "cvmp/polar.hpp"
#include "support.hpp"

using namespace cvmp;

TEST_CASE("grid dims parse and print") {
  CHECK(GridDims::parse("50x50").extent == std::vector<std::size_t>{50, 50});
  CHECK(GridDims::parse("96x96x6").voxels() == 96u * 96u * 6u);
  CHECK(GridDims{{7, 3}}.to_string() == "7x3");
  CHECK_THROWS_AS(GridDims::parse("50x"), ConfigError);
  CHECK_THROWS_AS(GridDims::parse("0x5"), ConfigError);
}

TEST_CASE("phase basis with masked slope is a constant rotation") {
  const DesignPair d({0.0, 0.3, 1.0}, {0.2, 0.9, 0.4});
  const auto a = phase_basis(kPi / 4.0, 7.0, false, d);
  REQUIRE(a.size() == 6u);
  for (double v : a) CHECK(v == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("phase basis at zero phase") {
  const DesignPair d({0.0, 1.0, 0.5, 0.2}, {0.0, 1.0, 0.5, 0.2});
  const auto a = phase_basis(0.0, 0.0, true, d);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(a[t] == 1.0);
    CHECK(a[4 + t] == 0.0);
  }
}

TEST_CASE("phase basis matches scalar trig per element") {
  std::vector<double> x(9, 0.0), u(9, 1.0);
  x[1] = 1.0;
  const DesignPair d(x, u);
  const double th = kPi / 4.0 + kPi / 36.0;
  const auto a = phase_basis(kPi / 4.0, kPi / 36.0, true, d);
  for (std::size_t t = 0; t < 9; ++t) {
    CHECK(a[t] == doctest::Approx(std::cos(th)).epsilon(1e-14));
    CHECK(a[9 + t] == doctest::Approx(std::sin(th)).epsilon(1e-14));
  }
}

TEST_CASE("phase basis lies on the unit circle (property)") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t T = 1 + static_cast<std::size_t>(rng.uniform() * 40);
    std::vector<double> x(T), u(T);
    for (std::size_t t = 0; t < T; ++t) u[t] = rng.normal(0.0, 3.0);
    x.assign(T, 0.0);
    const DesignPair d(x, u);
    const auto a = phase_basis(rng.normal(0.0, 5.0), rng.normal(0.0, 5.0), rng.uniform() < 0.5, d);
    double dot = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      CHECK(a[t] * a[t] + a[T + t] * a[T + t] == doctest::Approx(1.0).epsilon(1e-12));
      dot += a[t] * a[t] + a[T + t] * a[T + t];
    }
    // a'a = T, the column-wise form of A'A = I_T
    CHECK(dot == doctest::Approx(static_cast<double>(T)).epsilon(1e-12));
  }
}

TEST_CASE("phase basis rejects non-finite coefficients") {
  const DesignPair d({0.0, 1.0}, {0.0, 1.0});
  CHECK_THROWS_WITH_AS(phase_basis(NAN, 0.0, true, d), "invalid phase coefficients", NumericalError);
  CHECK_THROWS_AS(phase_basis(0.0, INFINITY, true, d), NumericalError);
}

TEST_CASE("polar mean fast path matches dense product") {
  SUBCASE("unit magnitude, zero phase") {
    const DesignPair d({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0});
    const auto m = polar_mean({1.0, 0.0, 0.0, 0.0}, false, false, d);
    CHECK(m == std::vector<double>{1, 1, 1, 0, 0, 0});
  }
  SUBCASE("zero coefficients") {
    const DesignPair d({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0});
    for (double v : polar_mean({0.0, 0.0, 0.3, 0.2}, true, true, d)) CHECK(v == 0.0);
  }
  SUBCASE("paper-scale coefficients on a ramp, T=8") {
    std::vector<double> ramp(8);
    for (std::size_t t = 0; t < 8; ++t) ramp[t] = static_cast<double>(t) / 7.0;
    const DesignPair d(ramp, ramp);
    VoxelState s;
    s.beta = {0.4909, 0.04909};
    s.gamma = {kPi / 4.0, kPi / 36.0};
    const auto fast = polar_mean({0.4909, 0.04909, kPi / 4.0, kPi / 36.0}, true, true, d);
    const auto dense = test::dense_mean(s, d);
    for (std::size_t i = 0; i < 16; ++i) CHECK(fast[i] == doctest::Approx(dense(i)).epsilon(1e-14));
  }
  SUBCASE("random indicator combinations") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
      const auto d = test::random_design(1 + static_cast<std::size_t>(rng.uniform() * 8) + 2, rng);
      VoxelState s;
      s.beta = {rng.normal(), rng.normal()};
      s.gamma = {rng.normal(), rng.normal()};
      s.lambda = rng.uniform() < 0.5;
      s.omega = rng.uniform() < 0.5;
      const auto fast = polar_mean({s.beta[0], s.beta[1], s.gamma[0], s.gamma[1]}, s.lambda,
                                   s.omega, d);
      const auto dense = test::dense_mean(s, d);
      for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast[i] == doctest::Approx(dense(static_cast<Eigen::Index>(i))).epsilon(1e-13));
    }
  }
}

TEST_CASE("arctan4") {
  CHECK(arctan4(0.0, 1.0) == 0.0);
  CHECK(arctan4(1.0, 0.0) == doctest::Approx(kPi / 2.0));
  CHECK(arctan4(-1.0, -1.0) == doctest::Approx(-3.0 * kPi / 4.0));
  CHECK(arctan4(0.0, -1.0) == doctest::Approx(kPi));  // codomain (-pi, pi]
  CHECK_THROWS_WITH_AS(arctan4(0.0, 0.0), "undefined angle", NumericalError);
}

TEST_CASE("wrap angle stays in (-pi, pi]") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double th = rng.normal(0.0, 30.0);
    const double w = wrap_angle(th);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::cos(w) == doctest::Approx(std::cos(th)).epsilon(1e-9));
    CHECK(std::sin(w) == doctest::Approx(std::sin(th)).epsilon(1e-9));
  }
}

TEST_CASE("design construction") {
  std::vector<double> x(200);
  for (std::size_t t = 0; t < 200; ++t) x[t] = (t / 20) % 2 == 0 ? 1.0 : 0.0;
  const auto d = build_design(x, PhaseRegressor::SameAsX);
  CHECK(d.time_points() == 200u);
  for (std::size_t t = 0; t < 200; ++t) CHECK(d.u()[t] == d.x()[t]);

  const std::vector<double> x2{0.0, 1.0}, u2{1.0, 0.0};
  const auto d2 = build_design(x2, PhaseRegressor::Explicit, std::span<const double>(u2));
  CHECK(d2.u()[0] == 1.0);
  CHECK(d2.u()[1] == 0.0);

  const std::vector<double> flat(10, 0.3);
  CHECK_THROWS_WITH_AS(build_design(flat, PhaseRegressor::SameAsX), "rank-deficient design", DataError);
}

TEST_CASE("complex series validates shapes") {
  CHECK_THROWS_AS(ComplexImageSeries(GridDims{{2, 2}}, 3, std::vector<double>(12), std::vector<double>(11)),
                  DataError);
  CHECK_THROWS_AS(ComplexImageSeries(GridDims{{2, 2}}, 3, std::vector<double>(6), std::vector<double>(6),
                                     {0, 9}),
                  DataError);
  const ComplexImageSeries ok(GridDims{{2, 2}}, 3, std::vector<double>(6), std::vector<double>(6), {1, 3});
  CHECK(ok.voxels() == 2u);
  CHECK(ok.grid_index(1) == 3u);
}

// ---- kernel equivalence ----

namespace {

void check_tables(const kernels::KernelTable& a, const kernels::KernelTable& b) {
  Rng rng(77);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 67u, 200u}) {
    std::vector<double> u(n), x(n), yr(n), yi(n);
    for (std::size_t t = 0; t < n; ++t) {
      u[t] = rng.normal(0.0, 2.0);
      x[t] = rng.uniform();
      yr[t] = rng.normal();
      yi[t] = rng.normal();
    }
    for (double g0 : {0.0, 0.7, -2.9, 40.0}) {
      for (double g1 : {0.0, 0.05, -1.3, 12.0}) {
        std::vector<double> ca(n), sa(n), cb(n), sb(n);
        a.phase_basis(g0, g1, u, ca, sa);
        b.phase_basis(g0, g1, u, cb, sb);
        for (std::size_t t = 0; t < n; ++t) {
          CHECK(ca[t] == doctest::Approx(cb[t]).epsilon(1e-14).scale(1.0));
          CHECK(sa[t] == doctest::Approx(sb[t]).epsilon(1e-14).scale(1.0));
        }
        const auto pa = a.phase_projection(g0, g1, u, x, yr, yi);
        const auto pb = b.phase_projection(g0, g1, u, x, yr, yi);
        const double tol = 1e-13 * (1.0 + static_cast<double>(n));
        CHECK(std::abs(pa.p0 - pb.p0) <= tol);
        CHECK(std::abs(pa.p1 - pb.p1) <= tol);
      }
    }
    std::vector<double> ma(n), mb(n);
    a.magnitude(yr, yi, ma);
    b.magnitude(yr, yi, mb);
    for (std::size_t t = 0; t < n; ++t) CHECK(ma[t] == doctest::Approx(mb[t]).epsilon(1e-15));
  }
}

}  // namespace

TEST_CASE("scalar kernels agree with libm") {
  const auto& k = kernels::scalar();
  const std::vector<double> u{0.0, 0.5, -1.0, 3.0};
  std::vector<double> c(4), s(4);
  k.phase_basis(0.3, 0.7, u, c, s);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(c[t] == doctest::Approx(std::cos(0.3 + 0.7 * u[t])).epsilon(1e-15));
    CHECK(s[t] == doctest::Approx(std::sin(0.3 + 0.7 * u[t])).epsilon(1e-15));
  }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const auto* vec = kernels::avx2();
  if (!vec) {
    MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
    return;
  }
  CHECK(vec->name == "avx2");
  check_tables(kernels::scalar(), *vec);
}

TEST_CASE("projection through the kernel matches the dense inner product") {
  Rng rng(19);
  for (int rep = 0; rep < 50; ++rep) {
    auto in = test::random_instance(3 + static_cast<std::size_t>(rng.uniform() * 30), rng);
    const auto data = test::voxel_data(in);
    const double g0 = in.state.gamma[0];
    for (double g1 : {0.0, in.state.gamma[1]}) {
      const auto p = project(data, in.design, g0, g1);
      VoxelState s;
      s.gamma = {g0, g1};
      const auto A = test::dense_phase_matrix(g0, g1, true, in.design);
      const auto X = test::dense_magnitude_design(in.design);
      const Eigen::VectorXd proj = (A * X).transpose() * test::stack(in.re, in.im);
      CHECK(p.p0 == doctest::Approx(proj(0)).epsilon(1e-12));
      CHECK(p.p1 == doctest::Approx(proj(1)).epsilon(1e-12));
    }
  }
}
