#include "cvmp/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "cvmp/error.hpp"
#include "cvmp/random.hpp"

namespace cvmp {
namespace {

constexpr std::uint64_t kTagPlacement = 0x52474e;  // "RGN"
constexpr std::uint64_t kTagNoise = 0x4e4f53;      // "NOS"

double gamma_pdf(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(t) - t / scale - std::lgamma(shape) -
                  shape * std::log(scale));
}

std::vector<std::size_t> unravel(std::size_t v, const GridDims& dims) {
  std::vector<std::size_t> coord(dims.rank());
  for (std::size_t a = 0; a < dims.rank(); ++a) {
    coord[a] = v % dims.extent[a];
    v /= dims.extent[a];
  }
  return coord;
}

void check_region_bounds(const GridDims& dims, const RegionSpec& region) {
  if (region.center.size() != dims.rank())
    throw ConfigError("region centre has wrong dimensionality");
  if (region.decay < 0.0 || region.radius < 0.0)
    throw ConfigError("region radius and decay must be non-negative");
  for (std::size_t a = 0; a < dims.rank(); ++a) {
    const double lo = region.center[a] - region.radius;
    const double hi = region.center[a] + region.radius;
    if (lo < 0.0 || hi > static_cast<double>(dims.extent[a] - 1))
      throw ConfigError("region out of bounds");
  }
}

}  // namespace

std::vector<double> make_stimulus(const StimulusSpec& spec) {
  if (spec.epochs == 0 || spec.on_len == 0 || spec.off_len == 0)
    throw ConfigError("stimulus needs positive epoch count and state lengths");
  std::vector<double> s;
  s.reserve(spec.epochs * (spec.on_len + spec.off_len));
  const double first = spec.active_first ? 1.0 : 0.0;
  const std::size_t first_len = spec.active_first ? spec.on_len : spec.off_len;
  const std::size_t second_len = spec.active_first ? spec.off_len : spec.on_len;
  for (std::size_t e = 0; e < spec.epochs; ++e) {
    s.insert(s.end(), first_len, first);
    s.insert(s.end(), second_len, 1.0 - first);
  }
  return s;
}

double double_gamma_hrf(double t, const HrfParams& p) {
  if (!(p.peak_dispersion > 0.0) || !(p.undershoot_dispersion > 0.0))
    throw ConfigError("HRF dispersions must be positive");
  if (t < 0.0) throw ConfigError("HRF evaluated at negative time");
  const double s = t - p.onset;
  return gamma_pdf(s, p.peak_shape, p.peak_dispersion) -
         p.undershoot_ratio * gamma_pdf(s, p.undershoot_shape, p.undershoot_dispersion);
}

std::vector<double> expected_bold(std::span<const double> stimulus, double tr,
                                  const HrfParams& params) {
  if (stimulus.empty()) throw ConfigError("empty stimulus");
  if (!(tr > 0.0)) throw ConfigError("TR must be positive");
  const std::size_t T = stimulus.size();
  std::vector<double> kernel(T);
  for (std::size_t k = 0; k < T; ++k) kernel[k] = double_gamma_hrf(static_cast<double>(k) * tr, params);

  std::vector<double> x(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= t; ++k) acc += stimulus[t - k] * kernel[k];
    x[t] = acc;
  }
  const double peak = *std::max_element(x.begin(), x.end());
  if (peak > 0.0)
    for (double& v : x) v /= peak;
  return x;
}

double region_distance(const RegionSpec& region, std::span<const std::size_t> coord) {
  double euclid = 0.0;
  double cheb = 0.0;
  for (std::size_t a = 0; a < coord.size(); ++a) {
    const double d = static_cast<double>(coord[a]) - region.center[a];
    euclid += d * d;
    cheb = std::max(cheb, std::abs(d));
  }
  return region.shape == RegionShape::Sphere ? std::sqrt(euclid) : cheb;
}

std::vector<double> strength_map(const GridDims& dims, std::span<const RegionSpec> regions,
                                 std::vector<int>* labels) {
  const std::size_t V = dims.voxels();
  std::vector<double> strength(V, 0.0);
  std::vector<int> owner(V, 0);
  for (std::size_t r = 0; r < regions.size(); ++r) check_region_bounds(dims, regions[r]);
  for (std::size_t v = 0; v < V; ++v) {
    const auto coord = unravel(v, dims);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const double d = region_distance(regions[r], coord);
      if (d > regions[r].radius + 1e-12) continue;
      if (owner[v] != 0) throw ConfigError("overlapping regions");
      owner[v] = static_cast<int>(r) + 1;
      strength[v] = std::max(0.0, 1.0 - regions[r].decay * d);
    }
  }
  if (labels) *labels = std::move(owner);
  return strength;
}

std::vector<std::uint8_t> TruthMaps::active_any() const {
  std::vector<std::uint8_t> out(active_mag.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = active_mag[v] | active_phase[v];
  return out;
}

std::string to_string(Assignment a) {
  switch (a) {
    case Assignment::MagOnly: return "mag-only";
    case Assignment::PhaseOnly: return "phase-only";
    case Assignment::Both: return "both";
  }
  return "both";
}

Assignment parse_assignment(const std::string& text) {
  if (text == "mag-only") return Assignment::MagOnly;
  if (text == "phase-only") return Assignment::PhaseOnly;
  if (text == "both") return Assignment::Both;
  throw ConfigError("unknown assignment '" + text + "'");
}

TruthMaps truth_from_strength(const GridDims& dims, std::span<const double> strength,
                              double mag_scale, double phase_scale) {
  TruthMaps truth;
  truth.dims = dims;
  const std::size_t V = strength.size();
  truth.beta1.resize(V);
  truth.gamma1.resize(V);
  truth.active_mag.resize(V);
  truth.active_phase.resize(V);
  for (std::size_t v = 0; v < V; ++v) {
    truth.beta1[v] = mag_scale * strength[v];
    truth.gamma1[v] = phase_scale * strength[v];
    truth.active_mag[v] = truth.beta1[v] != 0.0;
    truth.active_phase[v] = truth.gamma1[v] != 0.0;
  }
  return truth;
}

TruthMaps apply_assignment(const TruthMaps& truth, Assignment assignment) {
  TruthMaps out = truth;
  if (assignment == Assignment::MagOnly) {
    std::fill(out.gamma1.begin(), out.gamma1.end(), 0.0);
    std::fill(out.active_phase.begin(), out.active_phase.end(), 0);
  } else if (assignment == Assignment::PhaseOnly) {
    std::fill(out.beta1.begin(), out.beta1.end(), 0.0);
    std::fill(out.active_mag.begin(), out.active_mag.end(), 0);
  }
  return out;
}

std::vector<RegionSpec> single_simulation_regions() {
  return {
      RegionSpec{{12.0, 14.0}, 5.0, RegionShape::Sphere, 0.05},
      RegionSpec{{36.0, 14.0}, 5.0, RegionShape::Sphere, 0.05},
      RegionSpec{{24.0, 35.0}, 5.0, RegionShape::Cube, 0.15},
  };
}

TruthMaps single_simulation_truth(const SimConfig& config) {
  const GridDims dims{{50, 50}};
  const auto regions = single_simulation_regions();
  std::vector<int> labels;
  const auto strength = strength_map(dims, regions, &labels);
  TruthMaps truth = truth_from_strength(dims, strength, config.mag_scale, config.phase_scale);
  for (std::size_t v = 0; v < strength.size(); ++v) {
    if (labels[v] == 2) {
      truth.beta1[v] = 0.0;
      truth.active_mag[v] = 0;
    } else if (labels[v] == 1) {
      truth.gamma1[v] = 0.0;
      truth.active_phase[v] = 0;
    }
  }
  return truth;
}

std::vector<RandomMap> random_truth_maps(std::size_t n_maps, const RandomMapSpec& spec,
                                         std::uint64_t seed, double mag_scale,
                                         double phase_scale) {
  if (n_maps == 0) throw ConfigError("need at least one map");
  const GridDims dims{{spec.grid, spec.grid}};
  std::vector<RandomMap> maps;
  maps.reserve(n_maps);
  for (std::size_t m = 0; m < n_maps; ++m) {
    Rng rng(seed, m, kTagPlacement);
    std::vector<RegionSpec> regions;
    int attempts = 0;
    while (regions.size() < spec.regions) {
      if (++attempts > spec.max_attempts) throw DataError("cannot place regions");
      RegionSpec region;
      const int span = spec.radius_max - spec.radius_min + 1;
      region.radius = spec.radius_min + static_cast<int>(rng.uniform() * span);
      region.shape = rng.uniform() < 0.5 ? RegionShape::Sphere : RegionShape::Cube;
      region.decay = rng.uniform() * spec.decay_max;
      const auto r = static_cast<std::size_t>(region.radius);
      const std::size_t room = spec.grid - 2 * r;
      region.center = {static_cast<double>(r + static_cast<std::size_t>(rng.uniform() * room)),
                       static_cast<double>(r + static_cast<std::size_t>(rng.uniform() * room))};
      regions.push_back(region);
      try {
        strength_map(dims, regions);
      } catch (const ConfigError&) {
        regions.pop_back();
      }
    }
    const auto strength = strength_map(dims, regions);
    maps.push_back({regions, truth_from_strength(dims, strength, mag_scale, phase_scale)});
  }
  return maps;
}

ComplexImageSeries simulate_signal(const TruthMaps& truth, const SimConfig& config,
                                   const DesignPair& design, Assignment assignment) {
  if (!(config.sigma > 0.0)) throw ConfigError("sigma must be positive");
  const std::size_t V = truth.beta1.size();
  if (truth.gamma1.size() != V || truth.dims.voxels() != V)
    throw_shape_mismatch("truth maps", V, truth.gamma1.size());
  const std::size_t T = design.time_points();
  const auto x = design.x();
  const auto u = design.u();
  const bool use_mag = assignment != Assignment::PhaseOnly;
  const bool use_phase = assignment != Assignment::MagOnly;

  Rng rng(config.seed, 0, kTagNoise);
  std::vector<double> re(V * T);
  std::vector<double> im(V * T);
  for (std::size_t v = 0; v < V; ++v) {
    const double b1 = use_mag ? truth.beta1[v] : 0.0;
    const double g1 = use_phase ? truth.gamma1[v] : 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double rho = config.beta0 + x[t] * b1;
      const double theta = config.gamma0 + u[t] * g1;
      re[v * T + t] = rho * std::cos(theta) + config.sigma * rng.normal();
      im[v * T + t] = rho * std::sin(theta) + config.sigma * rng.normal();
    }
  }
  return ComplexImageSeries(truth.dims, T, std::move(re), std::move(im));
}

DesignPair simulation_design() {
  const auto stimulus = make_stimulus(StimulusSpec{});
  const auto x = expected_bold(stimulus, 1.0);
  return build_design(x, PhaseRegressor::SameAsX);
}

}  // namespace cvmp
