#pragma once

// Block parcellation and per-parcel graph machinery for the probit spatial prior.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cvmp/polar.hpp"

namespace cvmp {

struct Parcellation {
  GridDims dims;
  std::size_t requested = 0;           // G asked for
  std::vector<std::size_t> splits;     // blocks per axis; product is the realised G
  std::vector<std::size_t> parcel_of;  // grid voxel -> parcel index in [0, G)
  std::vector<std::vector<std::size_t>> voxels;  // parcel -> ascending grid indices

  std::size_t count() const { return voxels.size(); }
};

// Axis-aligned blocks whose side lengths are floor or ceil of extent / splits. When G has no
// factorisation that fits the grid, the nearest admissible G is used (recorded in splits).
Parcellation parcellate(const GridDims& dims, std::size_t G);

enum class Neighborhood { Edge, EdgeCorner };

// Adjacency among the given grid voxels: edge shares one axis step, EdgeCorner allows any
// combination of unit steps (8-neighbourhood in 2D, 26 in 3D).
Eigen::MatrixXd build_adjacency(const GridDims& dims, const std::vector<std::size_t>& voxels,
                                Neighborhood nb = Neighborhood::EdgeCorner);

// Q = diag(A 1) - A. Throws on asymmetric input.
Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency);

// Leading q eigenvectors of A in descending eigenvalue order, each column signed so that its
// largest-magnitude entry is positive. Columns with equal eigenvalues are ordered by the index of
// that entry.
Eigen::MatrixXd eigenbasis(const Eigen::MatrixXd& adjacency, std::size_t q,
                           Eigen::VectorXd* eigenvalues = nullptr);

// q = max(3, round(5 Vg / 200)), capped at Vg.
std::size_t default_basis_size(std::size_t parcel_voxels);

// Moore-Penrose inverse of a symmetric PSD matrix, dropping eigenvalues below cutoff.
Eigen::MatrixXd psd_pseudo_inverse(const Eigen::MatrixXd& m, double cutoff = 1e-10);

struct ParcelGraph {
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd laplacian;
  Eigen::MatrixXd basis;            // M, Vg x q
  Eigen::MatrixXd prior_precision;  // Q_s = M'QM
  Eigen::VectorXd leverage;         // c_v = m_v' Q_s^+ m_v
  Eigen::MatrixXd delta_cov;        // (Q_s + M'M)^-1
  Eigen::MatrixXd delta_cov_chol;   // lower Cholesky factor of delta_cov
  std::size_t q = 0;
};

ParcelGraph build_parcel_graph(const GridDims& dims, const std::vector<std::size_t>& voxels,
                               std::size_t q = 0, Neighborhood nb = Neighborhood::EdgeCorner);

}  // namespace cvmp
