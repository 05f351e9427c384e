#pragma once

// Gibbs / Metropolis-Hastings sampler for the polar magnitude-and-phase model with
// spike-and-slab selection on both slopes and a probit spatial prior per parcel.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvmp/kernels.hpp"
#include "cvmp/polar.hpp"
#include "cvmp/probit_field.hpp"
#include "cvmp/random.hpp"
#include "cvmp/spatial.hpp"

namespace cvmp {

// Collapsed: the magnitude indicator is drawn with beta integrated out and the phase indicator
// uses a Laplace pseudo-prior for the dormant slope, so the chain targets the model posterior.
// Literal: both indicators use the joint-density ratio at the current slopes.
enum class IndicatorUpdate { Collapsed, Literal };

struct SamplerConfig {
  double psi_lambda = ndtri(0.42);
  double psi_omega = ndtri(0.42);
  FieldPrior field{};
  std::size_t n_iter = 1000;
  std::size_t burn_in = 200;
  double mh_step_gamma0 = 0.05;
  double mh_step_gamma1 = 0.05;
  double threshold = 0.925;
  double mcse_target = 0.05;
  std::uint64_t seed = 1;
  std::size_t basis_size = 0;  // 0: scale with parcel size
  Neighborhood neighborhood = Neighborhood::EdgeCorner;
  IndicatorUpdate indicator_update = IndicatorUpdate::Collapsed;
  // Hold sigma2, tau2, xi2, eta, delta and kappa at their current values.
  bool freeze_hyper = false;

  void validate() const;
};

struct VoxelState {
  std::array<double, 2> beta{0.0, 0.0};
  std::array<double, 2> gamma{0.0, 0.0};
  bool lambda = true;
  bool omega = true;
  double sigma2 = 1.0;
  double eta_lambda = 0.0;
  double eta_omega = 0.0;
};

struct ParcelState {
  double tau2 = 1.0;
  double xi2 = 1.0;
  Eigen::VectorXd delta_lambda;
  Eigen::VectorXd delta_omega;
  double kappa_lambda = 1000.0;
  double kappa_omega = 1000.0;
};

// Per-voxel sums that make every phase-slope-free quantity O(1).
struct VoxelStats {
  double yy = 0.0;
  double sum_r = 0.0, sum_i = 0.0;      // sum y
  double x_r = 0.0, x_i = 0.0;          // sum x y
  double u_r = 0.0, u_i = 0.0;          // sum u y
  double xu_r = 0.0, xu_i = 0.0;        // sum x u y
  double uu_r = 0.0, uu_i = 0.0;        // sum u^2 y
  double xuu_r = 0.0, xuu_i = 0.0;      // sum x u^2 y
};

VoxelStats voxel_stats(std::span<const double> re, std::span<const double> im,
                       const DesignPair& design);

struct VoxelData {
  std::span<const double> re;
  std::span<const double> im;
  VoxelStats stats;
};

using kernels::Projection;

// p0 = a'y and p1 = (x* .* a)'y at phase (g0, g1); closed form when g1 == 0.
Projection project(const VoxelData& data, const DesignPair& design, double gamma0, double gamma1);

// ---- log-density ratios (all natural log) ----

// log(L0/L1) for the magnitude indicator at the current slope (joint density ratio).
double log_ratio_lambda(const VoxelState& s, double p1, const DesignPair& design, double tau2);

// log marginal likelihood of y with beta integrated out, up to terms shared by both indicators.
double log_marginal_magnitude(bool lambda, double p0, double p1, double yy,
                              const DesignPair& design, double sigma2, double tau2);

// log(L0/L1) for the phase indicator with slope s.gamma[1]; at_gamma is the projection at
// (g0, g1), at_zero the projection at (g0, 0).
double log_ratio_omega(const VoxelState& s, const Projection& at_gamma, const Projection& at_zero,
                       double xi2);

// Gaussian approximation to the phase-slope conditional at the current magnitude and g0:
// one Newton step from g1 = 0 plus the slab prior.
struct Gaussian1 {
  double mean = 0.0;
  double var = 1.0;
};
Gaussian1 phase_slope_pseudo_prior(const VoxelState& s, const VoxelStats& st, double xi2);

// log r for the random-walk move gamma -> proposal with current beta, lambda, omega.
double log_mh_ratio(const VoxelState& s, const Projection& current, const Projection& proposed,
                    const std::array<double, 2>& proposal, double xi2);

// P(indicator = 1) = Phi(z) / (Phi(z) + exp(log_l0_over_l1) (1 - Phi(z))), evaluated in logs.
double indicator_probability(double log_l0_over_l1, double z);

// Residual sum of squares ||y - A X Lambda beta||^2 via the projection identity.
double residual_ss(const VoxelState& s, const Projection& current, double yy,
                   const DesignPair& design);

struct IgParams {
  double shape;
  double scale;
};
IgParams tau2_params(std::span<const VoxelState> voxels);
IgParams xi2_params(std::span<const VoxelState> voxels);

// ---- single-site updates; `current` caches the projection at the current phase ----

void sample_lambda(VoxelState& s, const Projection& current, const VoxelStats& st,
                   const DesignPair& design, const ParcelState& p, const SamplerConfig& cfg,
                   Rng& rng);
// Conjugate draw of (b0, b1) for a Gaussian regression on X = [1, x] with sufficient statistics
// p0 = 1'y, p1 = x'y and slab variance tau2; b1 = 0 when lambda is off.
std::array<double, 2> draw_regression(bool lambda, double p0, double p1, double sigma2,
                                     double tau2, const DesignPair& design, Rng& rng);

void sample_beta(VoxelState& s, const Projection& current, const DesignPair& design,
                 const ParcelState& p, Rng& rng);
void sample_omega(VoxelState& s, Projection& current, const VoxelData& data,
                  const DesignPair& design, const ParcelState& p, const SamplerConfig& cfg,
                  Rng& rng);
bool sample_gamma_mh(VoxelState& s, Projection& current, const VoxelData& data,
                     const DesignPair& design, const ParcelState& p, const SamplerConfig& cfg,
                     Rng& rng);
void sample_sigma2(VoxelState& s, const Projection& current, const VoxelData& data,
                   const DesignPair& design, Rng& rng);
double sample_tau2(std::span<const VoxelState> voxels, Rng& rng);
double sample_xi2(std::span<const VoxelState> voxels, Rng& rng);

// Deterministic start: least squares of the magnitude on X, phase intercept from the mean
// complex value, both indicators on, residual variance floored at 1e-8.
VoxelState initialize_voxel(const VoxelData& data, const DesignPair& design);
ParcelState initialize_parcel(const ParcelGraph& graph, const FieldPrior& prior);

inline constexpr double kSigma2Floor = 1e-8;

// One parcel's chain.
class CvmpChain {
public:
  CvmpChain(const ComplexImageSeries& data, const DesignPair& design,
            std::vector<std::size_t> rows, const ParcelGraph& graph, const SamplerConfig& cfg,
            std::uint64_t stream);

  void sweep();

  std::vector<VoxelState>& voxels() { return voxels_; }
  const std::vector<VoxelState>& voxels() const { return voxels_; }
  ParcelState& parcel() { return parcel_; }
  const std::vector<std::size_t>& rows() const { return rows_; }
  // Recompute cached projections after editing voxel states directly.
  void refresh();
  std::uint64_t mh_accepted() const { return accepted_; }
  std::uint64_t mh_proposed() const { return proposed_; }

private:
  const DesignPair& design_;
  std::vector<std::size_t> rows_;
  const ParcelGraph& graph_;
  SamplerConfig cfg_;
  Rng rng_;
  std::vector<VoxelData> data_;
  std::vector<Projection> cache_;
  std::vector<VoxelState> voxels_;
  ParcelState parcel_;
  std::vector<double> eta_buf_;
  std::uint64_t accepted_ = 0;
  std::uint64_t proposed_ = 0;
};

struct PosteriorSummary {
  std::string model;
  GridDims dims;
  std::vector<std::size_t> grid_index;  // row -> grid voxel (identity when unmasked)
  // Posterior means. For the Cartesian baseline beta holds the real-part coefficients and
  // beta_imag the imaginary ones; gamma is empty for the baselines.
  std::vector<double> beta0, beta1;
  std::vector<double> beta_imag0, beta_imag1;
  std::vector<double> gamma0, gamma1;
  std::vector<double> prob_lambda, prob_omega;
  std::vector<std::uint8_t> active_mag, active_phase;
  std::vector<double> mcse_lambda, mcse_omega;
  std::vector<std::uint8_t> converged;
  double threshold = 0.925;
  double mcse_target = 0.05;
  std::size_t n_iter = 0;
  std::size_t burn_in = 0;
  std::size_t parcels = 0;
  double mh_acceptance = -1.0;  // negative when the model has no MH step
  double seconds = 0.0;

  std::size_t voxels() const { return prob_lambda.size(); }
  std::size_t unconverged() const;
};

// Partition of data rows by parcel, dropping empty parcels. Parcel ids are kept so RNG streams
// do not depend on the mask.
struct ParcelTask {
  std::size_t id;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> grid;
};
std::vector<ParcelTask> parcel_tasks(const ComplexImageSeries& data, const Parcellation& parc);

PosteriorSummary run_chain(const ComplexImageSeries& data, const DesignPair& design,
                           const Parcellation& parc, const SamplerConfig& cfg,
                           std::size_t threads = 1);

}  // namespace cvmp
