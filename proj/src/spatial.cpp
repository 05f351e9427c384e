#include "cvmp/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cvmp/error.hpp"

namespace cvmp {
namespace {

// All ways to write G as an ordered product of rank factors, each at most the axis extent.
void factorisations(std::size_t G, const std::vector<std::size_t>& extent, std::size_t axis,
                    std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out) {
  if (axis + 1 == extent.size()) {
    if (G <= extent[axis]) {
      cur.push_back(G);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (std::size_t f = 1; f <= std::min(G, extent[axis]); ++f) {
    if (G % f) continue;
    cur.push_back(f);
    factorisations(G / f, extent, axis + 1, cur, out);
    cur.pop_back();
  }
}

// Spread of log block side lengths; smaller is more cube-like.
double split_cost(const std::vector<std::size_t>& split, const std::vector<std::size_t>& extent) {
  std::vector<double> logs;
  for (std::size_t a = 0; a < split.size(); ++a)
    logs.push_back(std::log(static_cast<double>(extent[a]) / static_cast<double>(split[a])));
  const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
  double ss = 0.0;
  for (double l : logs) ss += (l - mean) * (l - mean);
  return ss;
}

std::vector<std::size_t> best_split(std::size_t G, const std::vector<std::size_t>& extent) {
  std::vector<std::vector<std::size_t>> cands;
  std::vector<std::size_t> cur;
  factorisations(G, extent, 0, cur, cands);
  if (cands.empty()) return {};
  std::vector<std::size_t> best = cands.front();
  double best_cost = split_cost(best, extent);
  for (const auto& c : cands) {
    const double cost = split_cost(c, extent);
    if (cost < best_cost - 1e-12) {
      best = c;
      best_cost = cost;
    }
  }
  return best;
}

std::size_t block_of(std::size_t coord, std::size_t extent, std::size_t splits) {
  // Block b covers [floor(b n / s), floor((b+1) n / s)).
  std::size_t b = coord * splits / extent;
  while (b + 1 < splits && (b + 1) * extent / splits <= coord) ++b;
  while (b > 0 && b * extent / splits > coord) --b;
  return b;
}

}  // namespace

Parcellation parcellate(const GridDims& dims, std::size_t G) {
  const std::size_t V = dims.voxels();
  if (G == 0) throw ConfigError("parcel count must be positive");
  if (G > V) throw ConfigError("more parcels than voxels");

  std::vector<std::size_t> split;
  for (std::size_t d = 0; d < V && split.empty(); ++d) {
    if (G > d) split = best_split(G - d, dims.extent);
    if (split.empty()) split = best_split(G + d, dims.extent);
  }

  Parcellation p;
  p.dims = dims;
  p.requested = G;
  p.splits = split;
  const std::size_t n_parcels =
      std::accumulate(split.begin(), split.end(), std::size_t{1}, std::multiplies<>());
  p.voxels.resize(n_parcels);
  p.parcel_of.resize(V);
  for (std::size_t v = 0; v < V; ++v) {
    std::size_t rest = v;
    std::size_t id = 0;
    std::size_t stride = 1;
    for (std::size_t a = 0; a < dims.rank(); ++a) {
      const std::size_t c = rest % dims.extent[a];
      rest /= dims.extent[a];
      id += block_of(c, dims.extent[a], split[a]) * stride;
      stride *= split[a];
    }
    p.parcel_of[v] = id;
    p.voxels[id].push_back(v);
  }
  return p;
}

Eigen::MatrixXd build_adjacency(const GridDims& dims, const std::vector<std::size_t>& voxels,
                                Neighborhood nb) {
  const std::size_t n = voxels.size();
  const std::size_t rank = dims.rank();
  std::vector<std::vector<long>> coords(n, std::vector<long>(rank));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = voxels[i];
    for (std::size_t a = 0; a < rank; ++a) {
      coords[i][a] = static_cast<long>(rest % dims.extent[a]);
      rest /= dims.extent[a];
    }
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      long cheb = 0;
      long manhattan = 0;
      for (std::size_t a = 0; a < rank; ++a) {
        const long d = std::labs(coords[i][a] - coords[j][a]);
        cheb = std::max(cheb, d);
        manhattan += d;
      }
      const bool adjacent = nb == Neighborhood::EdgeCorner ? cheb == 1 : manhattan == 1;
      if (adjacent) A(i, j) = A(j, i) = 1.0;
    }
  }
  return A;
}

Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw DataError("adjacency must be square");
  if (adjacency.size() > 0 && (adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw DataError("adjacency must be symmetric");
  Eigen::MatrixXd Q = -adjacency;
  Q.diagonal() += adjacency.rowwise().sum();
  return Q;
}

Eigen::MatrixXd eigenbasis(const Eigen::MatrixXd& adjacency, std::size_t q,
                           Eigen::VectorXd* eigenvalues) {
  const auto n = static_cast<std::size_t>(adjacency.rows());
  if (q == 0 || q > n) throw ConfigError("eigenvector count must be in [1, parcel size]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");

  struct Column {
    double value;
    Eigen::Index pivot;
    Eigen::VectorXd vec;
  };
  std::vector<Column> cols;
  for (Eigen::Index k = static_cast<Eigen::Index>(n) - 1; k >= 0; --k) {
    Eigen::VectorXd v = es.eigenvectors().col(k);
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      // First index wins among near-equal magnitudes so the choice is stable.
      if (std::abs(v(i)) > best + 1e-12) {
        best = std::abs(v(i));
        pivot = i;
      }
    }
    if (v(pivot) < 0.0) v = -v;
    cols.push_back({es.eigenvalues()(k), pivot, std::move(v)});
  }
  std::stable_sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) {
    if (std::abs(a.value - b.value) > 1e-10) return a.value > b.value;
    return a.pivot < b.pivot;
  });

  Eigen::MatrixXd M(n, q);
  if (eigenvalues) eigenvalues->resize(q);
  for (std::size_t k = 0; k < q; ++k) {
    M.col(k) = cols[k].vec;
    if (eigenvalues) (*eigenvalues)(k) = cols[k].value;
  }
  return M;
}

std::size_t default_basis_size(std::size_t parcel_voxels) {
  const auto scaled = static_cast<std::size_t>(std::lround(5.0 * parcel_voxels / 200.0));
  return std::min(parcel_voxels, std::max<std::size_t>(3, scaled));
}

Eigen::MatrixXd psd_pseudo_inverse(const Eigen::MatrixXd& m, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > cutoff ? 1.0 / inv(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

ParcelGraph build_parcel_graph(const GridDims& dims, const std::vector<std::size_t>& voxels,
                               std::size_t q, Neighborhood nb) {
  if (voxels.empty()) throw DataError("empty parcel");
  ParcelGraph g;
  g.q = q ? std::min(q, voxels.size()) : default_basis_size(voxels.size());
  g.adjacency = build_adjacency(dims, voxels, nb);
  g.laplacian = laplacian(g.adjacency);
  g.basis = eigenbasis(g.adjacency, g.q);
  g.prior_precision = g.basis.transpose() * g.laplacian * g.basis;
  g.prior_precision = 0.5 * (g.prior_precision + g.prior_precision.transpose());

  const Eigen::MatrixXd pinv = psd_pseudo_inverse(g.prior_precision);
  g.leverage = (g.basis * pinv).cwiseProduct(g.basis).rowwise().sum();

  const Eigen::MatrixXd prec =
      g.prior_precision + g.basis.transpose() * g.basis;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericalError("spatial precision not positive definite");
  g.delta_cov = llt.solve(Eigen::MatrixXd::Identity(g.q, g.q));
  g.delta_cov = 0.5 * (g.delta_cov + g.delta_cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> cov_llt(g.delta_cov);
  if (cov_llt.info() != Eigen::Success) throw NumericalError("spatial covariance factorisation failed");
  g.delta_cov_chol = cov_llt.matrixL();
  return g;
}

}  // namespace cvmp
