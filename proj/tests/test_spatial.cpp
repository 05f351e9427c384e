#include <doctest.h>

#include <algorithm>
#include <set>

#include "cvmp/error.hpp"
#include "cvmp/random.hpp"
#include "cvmp/spatial.hpp"

using namespace cvmp;

namespace {

std::vector<std::size_t> all_voxels(const GridDims& d) {
  std::vector<std::size_t> v(d.voxels());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

void check_partition(const Parcellation& p) {
  const std::size_t V = p.dims.voxels();
  std::vector<int> seen(V, 0);
  std::size_t total = 0;
  for (std::size_t g = 0; g < p.count(); ++g) {
    total += p.voxels[g].size();
    CHECK(std::is_sorted(p.voxels[g].begin(), p.voxels[g].end()));
    for (std::size_t v : p.voxels[g]) {
      ++seen[v];
      CHECK(p.parcel_of[v] == g);
    }
  }
  CHECK(total == V);
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

std::multiset<std::size_t> sizes(const Parcellation& p) {
  std::multiset<std::size_t> s;
  for (const auto& v : p.voxels) s.insert(v.size());
  return s;
}

}  // namespace

TEST_CASE("block parcellation examples") {
  SUBCASE("50x50 into 16") {
    const auto p = parcellate(GridDims{{50, 50}}, 16);
    CHECK(p.splits == std::vector<std::size_t>{4, 4});
    CHECK(p.count() == 16u);
    const auto s = sizes(p);
    for (std::size_t n : s) CHECK((n == 144 || n == 156 || n == 169));
    CHECK(s.count(144) == 4u);
    CHECK(s.count(156) == 8u);
    CHECK(s.count(169) == 4u);
    check_partition(p);
  }
  SUBCASE("4x4 into 4") {
    const auto p = parcellate(GridDims{{4, 4}}, 4);
    CHECK(p.count() == 4u);
    for (const auto& v : p.voxels) CHECK(v.size() == 4u);
    CHECK(p.voxels[0] == std::vector<std::size_t>{0, 1, 4, 5});
    check_partition(p);
  }
  SUBCASE("96x96 into 25") {
    const auto p = parcellate(GridDims{{96, 96}}, 25);
    CHECK(p.splits == std::vector<std::size_t>{5, 5});
    const auto s = sizes(p);
    // sides {19,19,19,19,20} on each axis
    CHECK(s.count(19 * 19) == 16u);
    CHECK(s.count(19 * 20) == 8u);
    CHECK(s.count(20 * 20) == 1u);
    check_partition(p);
  }
  SUBCASE("more parcels than voxels") { CHECK_THROWS_AS(parcellate(GridDims{{2, 2}}, 5), ConfigError); }
}

TEST_CASE("parcellation is a partition (property)") {
  Rng rng(301);
  for (int rep = 0; rep < 60; ++rep) {
    const bool three = rng.uniform() < 0.4;
    GridDims d;
    d.extent = {2 + static_cast<std::size_t>(rng.uniform() * 30), 2 + static_cast<std::size_t>(rng.uniform() * 30)};
    if (three) d.extent.push_back(1 + static_cast<std::size_t>(rng.uniform() * 6));
    const std::size_t G = 1 + static_cast<std::size_t>(rng.uniform() * std::min<std::size_t>(d.voxels(), 40));
    CAPTURE(d.to_string());
    CAPTURE(G);
    const auto p = parcellate(d, G);
    check_partition(p);
    std::size_t prod = 1;
    for (std::size_t s : p.splits) prod *= s;
    CHECK(prod == p.count());
    // block sides differ by at most one along every axis
    for (std::size_t axis = 0; axis < d.extent.size(); ++axis) {
      const std::size_t lo = d.extent[axis] / p.splits[axis];
      const std::size_t hi = (d.extent[axis] + p.splits[axis] - 1) / p.splits[axis];
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("adjacency examples") {
  const GridDims d{{2, 2}};
  const auto k4 = build_adjacency(d, all_voxels(d), Neighborhood::EdgeCorner);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(k4(i, j) == (i == j ? 0.0 : 1.0));

  const auto c4 = build_adjacency(d, all_voxels(d), Neighborhood::Edge);
  // voxels 0,1 / 2,3 in row-major order: diagonals 0-3 and 1-2 are not edges
  CHECK(c4(0, 3) == 0.0);
  CHECK(c4(1, 2) == 0.0);
  CHECK(c4(0, 1) == 1.0);
  CHECK(c4(0, 2) == 1.0);
  CHECK(c4.rowwise().sum().minCoeff() == 2.0);

  const GridDims d3{{3, 3}};
  const auto a3 = build_adjacency(d3, all_voxels(d3));
  CHECK(a3.row(4).sum() == 8.0);
  CHECK(a3.row(0).sum() == 3.0);

  const GridDims cube{{3, 3, 3}};
  CHECK(build_adjacency(cube, all_voxels(cube)).row(13).sum() == 26.0);
  CHECK(build_adjacency(cube, all_voxels(cube), Neighborhood::Edge).row(13).sum() == 6.0);
}

TEST_CASE("laplacian examples") {
  const GridDims d{{2, 2}};
  const auto q = laplacian(build_adjacency(d, all_voxels(d)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(q(i, j) == (i == j ? 3.0 : -1.0));

  CHECK(laplacian(Eigen::MatrixXd::Zero(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  const auto cyc = laplacian(build_adjacency(d, all_voxels(d), Neighborhood::Edge));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cyc);
  const Eigen::Vector4d expect(0.0, 2.0, 2.0, 4.0);
  CHECK((es.eigenvalues() - expect).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS(laplacian(asym));
}

TEST_CASE("eigenbasis examples") {
  const GridDims d{{2, 2}};
  const auto m = eigenbasis(build_adjacency(d, all_voxels(d)), 1);
  for (int i = 0; i < 4; ++i) CHECK(m(i, 0) == doctest::Approx(0.5).epsilon(1e-14));

  const GridDims d3{{3, 3}};
  const auto a = build_adjacency(d3, all_voxels(d3));
  Eigen::VectorXd ev;
  const auto m2 = eigenbasis(a, 2, &ev);
  for (int k = 0; k < 2; ++k) CHECK((a * m2.col(k) - ev(k) * m2.col(k)).norm() < 1e-10);
  CHECK(ev(0) >= ev(1));
  CHECK_THROWS(eigenbasis(a, 10));
}

TEST_CASE("graph invariants on random parcels (property)") {
  Rng rng(302);
  for (int rep = 0; rep < 40; ++rep) {
    GridDims d;
    d.extent = {2 + static_cast<std::size_t>(rng.uniform() * 10), 2 + static_cast<std::size_t>(rng.uniform() * 10)};
    if (rng.uniform() < 0.3) d.extent.push_back(2 + static_cast<std::size_t>(rng.uniform() * 3));
    // random subset, as left by a mask
    std::vector<std::size_t> vox;
    for (std::size_t v = 0; v < d.voxels(); ++v)
      if (rng.uniform() < 0.8) vox.push_back(v);
    if (vox.size() < 2) continue;
    const auto nb = rng.uniform() < 0.5 ? Neighborhood::Edge : Neighborhood::EdgeCorner;
    const std::size_t q = 1 + static_cast<std::size_t>(rng.uniform() * std::min<std::size_t>(vox.size(), 8));
    CAPTURE(rep);
    const auto g = build_parcel_graph(d, vox, q, nb);

    CHECK((g.adjacency - g.adjacency.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.adjacency.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd x(g.laplacian.rows());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
      CHECK(x.dot(g.laplacian * x) >= -1e-10);
    }
    const Eigen::MatrixXd mtm = g.basis.transpose() * g.basis;
    CHECK((mtm - Eigen::MatrixXd::Identity(g.q, g.q)).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::VectorXd ev;
    const auto m = eigenbasis(g.adjacency, g.q, &ev);
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      CHECK((g.adjacency * m.col(k) - ev(k) * m.col(k)).norm() < 1e-10);
      // sign rule: the first entry of (near-)maximal magnitude is positive
      const double top = m.col(k).cwiseAbs().maxCoeff();
      Eigen::Index pivot = 0;
      while (std::abs(m(pivot, k)) < top - 1e-12) ++pivot;
      CHECK(m(pivot, k) > 0.0);
    }
    CHECK((g.prior_precision - g.prior_precision.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.prior_precision);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(g.leverage.minCoeff() >= -1e-10);
  }
}

TEST_CASE("eigenbasis is reproducible") {
  const GridDims d{{12, 13}};
  const auto a = build_adjacency(d, all_voxels(d));
  const auto m1 = eigenbasis(a, 5);
  const auto m2 = eigenbasis(a, 5);
  CHECK((m1 - m2).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("leverage uses the pseudo-inverse of the projected precision") {
  const GridDims d{{5, 4}};
  const auto g = build_parcel_graph(d, all_voxels(d), 4);
  const Eigen::MatrixXd pinv = psd_pseudo_inverse(g.prior_precision);
  for (Eigen::Index v = 0; v < g.basis.rows(); ++v) {
    const Eigen::VectorXd mv = g.basis.row(v).transpose();
    CHECK(g.leverage(v) == doctest::Approx(mv.dot(pinv * mv)).epsilon(1e-10));
  }
  // pseudo-inverse identities
  const Eigen::MatrixXd& Q = g.prior_precision;
  CHECK((Q * pinv * Q - Q).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((pinv * Q * pinv - pinv).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("default basis size") {
  CHECK(default_basis_size(200) == 5u);
  CHECK(default_basis_size(169) == 4u);
  CHECK(default_basis_size(20) == 3u);
  CHECK(default_basis_size(2) == 2u);
  CHECK(default_basis_size(1000) == 25u);
}
