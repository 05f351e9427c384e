#pragma once

// Synthetic complex-valued datasets: block stimulus, double-gamma HRF convolution, region
// strength maps, and the polar signal model with circular Gaussian noise.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvmp/polar.hpp"

namespace cvmp {

struct StimulusSpec {
  std::size_t epochs = 5;
  std::size_t on_len = 20;
  std::size_t off_len = 20;
  bool active_first = true;
};

std::vector<double> make_stimulus(const StimulusSpec& spec);

// Two-gamma HRF: Gamma(peak_shape, peak_dispersion) minus undershoot_ratio * Gamma(undershoot).
struct HrfParams {
  double peak_shape = 6.0;
  double undershoot_shape = 16.0;
  double peak_dispersion = 1.0;
  double undershoot_dispersion = 1.0;
  double undershoot_ratio = 1.0 / 6.0;
  double onset = 0.0;
};

double double_gamma_hrf(double t, const HrfParams& params = {});

// Causal convolution of the stimulus with the sampled HRF, truncated to the stimulus length and
// rescaled to a maximum of one.
std::vector<double> expected_bold(std::span<const double> stimulus, double tr = 1.0,
                                  const HrfParams& params = {});

enum class RegionShape { Sphere, Cube };

struct RegionSpec {
  std::vector<double> center;  // grid coordinates, one per axis
  double radius = 5.0;
  RegionShape shape = RegionShape::Sphere;
  double decay = 0.0;
};

// Distance from the region centre: Euclidean for spheres, Chebyshev for cubes.
double region_distance(const RegionSpec& region, std::span<const std::size_t> coord);

// Strength max(0, 1 - decay * d) inside each region, zero elsewhere. Throws on regions that leave
// the grid or overlap. When labels is given it receives the 1-based region id per voxel.
std::vector<double> strength_map(const GridDims& dims, std::span<const RegionSpec> regions,
                                 std::vector<int>* labels = nullptr);

struct TruthMaps {
  std::vector<double> beta1;
  std::vector<double> gamma1;
  std::vector<std::uint8_t> active_mag;
  std::vector<std::uint8_t> active_phase;
  GridDims dims;

  std::vector<std::uint8_t> active_any() const;
};

enum class Assignment { MagOnly, PhaseOnly, Both };
std::string to_string(Assignment a);
Assignment parse_assignment(const std::string& text);

struct SimConfig {
  double beta0 = 0.4909;
  double gamma0 = kPi / 4.0;
  double sigma = 0.04909;
  double mag_scale = 0.04909;
  double phase_scale = kPi / 36.0;
  std::uint64_t seed = 1;
};

TruthMaps truth_from_strength(const GridDims& dims, std::span<const double> strength,
                              double mag_scale, double phase_scale);

// Zeroes the magnitude or phase part according to the assignment.
TruthMaps apply_assignment(const TruthMaps& truth, Assignment assignment);

// Three-region 50x50 layout: region 1 magnitude-only circle, region 2 phase-only circle,
// region 3 square active in both, decay rates 0.05, 0.05 and 0.15.
std::vector<RegionSpec> single_simulation_regions();
TruthMaps single_simulation_truth(const SimConfig& config);

struct RandomMapSpec {
  std::size_t grid = 50;
  std::size_t regions = 3;
  int radius_min = 2;
  int radius_max = 6;
  double decay_max = 0.3;
  int max_attempts = 1000;
};

struct RandomMap {
  std::vector<RegionSpec> regions;
  TruthMaps truth;
};

// Map i is generated from its own stream (seed, i), so maps are independent of n_maps.
std::vector<RandomMap> random_truth_maps(std::size_t n_maps, const RandomMapSpec& spec,
                                         std::uint64_t seed, double mag_scale = 0.04909,
                                         double phase_scale = kPi / 36.0);

ComplexImageSeries simulate_signal(const TruthMaps& truth, const SimConfig& config,
                                   const DesignPair& design, Assignment assignment);

// The design used by every simulation: 5 epochs of 20 on / 20 off, HRF-convolved, u = x.
DesignPair simulation_design();

}  // namespace cvmp
