#pragma once

// Comparison samplers: magnitude-only linear regression (MO) and the Cartesian real/imaginary
// regression with one shared activation indicator (CV-R&I). Both reuse the spike-and-slab and
// probit spatial prior machinery and are fully conjugate.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cvmp/sampler.hpp"

namespace cvmp {

enum class Model { Cvmp, Mo, Cvri };
std::string to_string(Model m);
Model parse_model(const std::string& text);

// Default probit offset and threshold for each model.
SamplerConfig default_config(Model m);

std::vector<double> magnitude_series(const ComplexImageSeries& data);

struct MoVoxelState {
  std::array<double, 2> beta{0.0, 0.0};
  bool lambda = true;
  double sigma2 = 1.0;
  double eta = 0.0;
};

struct CvriVoxelState {
  std::array<double, 2> beta_r{0.0, 0.0};
  std::array<double, 2> beta_i{0.0, 0.0};
  bool lambda = true;
  double sigma2 = 1.0;
  double eta = 0.0;
};

// Joint-density ratio log(L0/L1) at the current slopes, magnitude-only model.
// p1 = x'y_M.
double mo_log_ratio_lambda(const MoVoxelState& s, double p1, const DesignPair& design, double tau2);

// Same for the Cartesian model; p1r = x'y_R, p1i = x'y_I.
double cvri_log_ratio_lambda(const CvriVoxelState& s, double p1r, double p1i,
                             const DesignPair& design, double tau2);

// Slab-variance conditionals.
IgParams mo_tau2_params(std::span<const MoVoxelState> voxels);
IgParams cvri_tau2_params(std::span<const CvriVoxelState> voxels);

// One parcel's magnitude-only chain (exposed for tests).
class MoChain {
public:
  MoChain(const ComplexImageSeries& data, const DesignPair& design, std::vector<std::size_t> rows,
          const ParcelGraph& graph, const SamplerConfig& cfg, std::uint64_t stream);
  void sweep();
  std::vector<MoVoxelState>& voxels() { return voxels_; }
  double& tau2() { return tau2_; }

  struct Stats {
    double sum = 0.0, xsum = 0.0, sq = 0.0;
  };

private:
  const DesignPair& design_;
  const ParcelGraph& graph_;
  SamplerConfig cfg_;
  Rng rng_;
  std::vector<Stats> stats_;
  std::vector<MoVoxelState> voxels_;
  double tau2_ = 1.0;
  double kappa_ = 1000.0;
  Eigen::VectorXd delta_;
  std::vector<double> eta_buf_;
};

class CvriChain {
public:
  CvriChain(const ComplexImageSeries& data, const DesignPair& design,
            std::vector<std::size_t> rows, const ParcelGraph& graph, const SamplerConfig& cfg,
            std::uint64_t stream);
  void sweep();
  std::vector<CvriVoxelState>& voxels() { return voxels_; }
  double& tau2() { return tau2_; }

  struct Stats {
    double yy = 0.0, sum_r = 0.0, sum_i = 0.0, x_r = 0.0, x_i = 0.0;
  };

private:
  const DesignPair& design_;
  const ParcelGraph& graph_;
  SamplerConfig cfg_;
  Rng rng_;
  std::vector<Stats> stats_;
  std::vector<CvriVoxelState> voxels_;
  double tau2_ = 1.0;
  double kappa_ = 1000.0;
  Eigen::VectorXd delta_;
  std::vector<double> eta_buf_;
};

PosteriorSummary run_mo(const ComplexImageSeries& data, const DesignPair& design,
                        const Parcellation& parc, const SamplerConfig& cfg,
                        std::size_t threads = 1);
PosteriorSummary run_cvri(const ComplexImageSeries& data, const DesignPair& design,
                          const Parcellation& parc, const SamplerConfig& cfg,
                          std::size_t threads = 1);

PosteriorSummary run_model(Model m, const ComplexImageSeries& data, const DesignPair& design,
                           const Parcellation& parc, const SamplerConfig& cfg,
                           std::size_t threads = 1);

struct DerivedEstimates {
  std::vector<double> beta1;
  std::optional<std::vector<double>> gamma1;
};

// cvmp: posterior means; mo: slope of the magnitude fit, no phase estimate; cvri: modulus of the
// (real, imaginary) slopes and arctan4(I1, R1) for declared-active voxels, 0 elsewhere.
DerivedEstimates derived_estimates(const PosteriorSummary& summary);

}  // namespace cvmp
