#pragma once

// Helpers shared by the unit tests: random small instances and dense reference evaluations
// written without the fast-path identities.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cvmp/polar.hpp"
#include "cvmp/random.hpp"
#include "cvmp/sampler.hpp"

namespace cvmp::test {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline DesignPair random_design(std::size_t T, Rng& rng) {
  std::vector<double> x(T), u(T);
  for (std::size_t t = 0; t < T; ++t) {
    x[t] = rng.uniform();
    u[t] = rng.uniform();
  }
  x[0] = 0.0;  // keep the design full rank
  x[1] = 1.0;
  return DesignPair(x, u);
}

// A_v (2T x T) stacked as [diag(cos); diag(sin)].
inline Eigen::MatrixXd dense_phase_matrix(double g0, double g1, bool omega, const DesignPair& d) {
  const auto T = static_cast<Eigen::Index>(d.time_points());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * T, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double th = g0 + d.u()[t] * (omega ? g1 : 0.0);
    A(t, t) = std::cos(th);
    A(T + t, t) = std::sin(th);
  }
  return A;
}

inline Eigen::MatrixXd dense_magnitude_design(const DesignPair& d) {
  const auto T = static_cast<Eigen::Index>(d.time_points());
  Eigen::MatrixXd X(T, 2);
  for (Eigen::Index t = 0; t < T; ++t) {
    X(t, 0) = 1.0;
    X(t, 1) = d.x()[t];
  }
  return X;
}

// A X Lambda beta through explicit matrix products.
inline Eigen::VectorXd dense_mean(const VoxelState& s, const DesignPair& d) {
  Eigen::Vector2d b(s.beta[0], s.lambda ? s.beta[1] : 0.0);
  return dense_phase_matrix(s.gamma[0], s.gamma[1], s.omega, d) * dense_magnitude_design(d) * b;
}

inline Eigen::VectorXd stack(std::span<const double> re, std::span<const double> im) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(re.size() + im.size()));
  for (std::size_t t = 0; t < re.size(); ++t) {
    y(static_cast<Eigen::Index>(t)) = re[t];
    y(static_cast<Eigen::Index>(re.size() + t)) = im[t];
  }
  return y;
}

inline double log_normal(double x, double mean, double var) {
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * (x - mean) * (x - mean) / var;
}

// log N(y; mean, sigma2 I).
inline double log_lik(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, double sigma2) {
  const double n = static_cast<double>(y.size());
  return -0.5 * n * (kLog2Pi + std::log(sigma2)) - 0.5 * (y - mean).squaredNorm() / sigma2;
}

// log N(y; 0, sigma2 I + tau2 D D'), the likelihood with a N(0, tau2 I) coefficient integrated.
inline double log_marginal_dense(const Eigen::VectorXd& y, const Eigen::MatrixXd& D, double sigma2,
                                 double tau2) {
  const auto n = y.size();
  Eigen::MatrixXd S = sigma2 * Eigen::MatrixXd::Identity(n, n) + tau2 * D * D.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  const Eigen::VectorXd w = llt.matrixL().solve(y);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (static_cast<double>(n) * kLog2Pi + logdet + w.squaredNorm());
}

struct Instance {
  DesignPair design;
  std::vector<double> re, im;
  VoxelState state;
  double tau2 = 1.0, xi2 = 1.0;
};

// Random voxel with polar-model data and a random current state.
inline Instance random_instance(std::size_t T, Rng& rng) {
  Instance in;
  in.design = random_design(T, rng);
  const double b0 = 0.5 + rng.uniform();
  const double b1 = rng.normal(0.0, 0.5);
  const double g0 = rng.normal(0.0, 1.0);
  const double g1 = rng.normal(0.0, 0.5);
  const double sd = 0.05 + 0.3 * rng.uniform();
  in.re.resize(T);
  in.im.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double rho = b0 + in.design.x()[t] * b1;
    const double th = g0 + in.design.u()[t] * g1;
    in.re[t] = rho * std::cos(th) + sd * rng.normal();
    in.im[t] = rho * std::sin(th) + sd * rng.normal();
  }
  auto& s = in.state;
  s.beta = {rng.normal(0.5, 0.3), rng.normal(0.0, 0.5)};
  s.gamma = {rng.normal(0.0, 1.0), rng.normal(0.0, 0.5)};
  s.lambda = rng.uniform() < 0.5;
  s.omega = rng.uniform() < 0.5;
  s.sigma2 = 0.01 + rng.uniform();
  in.tau2 = 0.1 + 2.0 * rng.uniform();
  in.xi2 = 0.1 + 2.0 * rng.uniform();
  return in;
}

inline VoxelData voxel_data(const Instance& in) {
  VoxelData d{in.re, in.im, {}};
  d.stats = voxel_stats(in.re, in.im, in.design);
  return d;
}

// Sample mean and its standard error.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
inline MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace cvmp::test
