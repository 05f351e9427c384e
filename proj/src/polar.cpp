#include "cvmp/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cvmp/error.hpp"
#include "cvmp/kernels.hpp"

namespace cvmp {

std::size_t GridDims::voxels() const {
  if (extent.empty()) return 0;
  return std::accumulate(extent.begin(), extent.end(), std::size_t{1}, std::multiplies<>());
}

std::string GridDims::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < extent.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(extent[i]);
  }
  return out;
}

GridDims GridDims::parse(const std::string& text) {
  GridDims dims;
  if (text.empty() || text.back() == 'x') throw ConfigError("invalid grid dims '" + text + "'");
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("invalid grid dims '" + text + "'");
    dims.extent.push_back(std::stoul(part));
  }
  if (dims.extent.empty() || dims.extent.size() > 3 ||
      std::find(dims.extent.begin(), dims.extent.end(), 0u) != dims.extent.end())
    throw ConfigError("invalid grid dims '" + text + "'");
  return dims;
}

ComplexImageSeries::ComplexImageSeries(GridDims dims, std::size_t time_points,
                                       std::vector<double> real, std::vector<double> imag,
                                       std::vector<std::size_t> grid_index)
    : dims_(std::move(dims)),
      time_points_(time_points),
      real_(std::move(real)),
      imag_(std::move(imag)),
      grid_index_(std::move(grid_index)) {
  if (time_points_ == 0) throw DataError("complex series needs at least one time point");
  voxels_ = grid_index_.empty() ? dims_.voxels() : grid_index_.size();
  if (real_.size() != voxels_ * time_points_)
    throw_shape_mismatch("real part", voxels_ * time_points_, real_.size());
  if (imag_.size() != voxels_ * time_points_)
    throw_shape_mismatch("imaginary part", voxels_ * time_points_, imag_.size());
  for (std::size_t g : grid_index_)
    if (g >= dims_.voxels()) throw DataError("mask index outside grid");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(real_.begin(), real_.end(), finite) ||
      !std::all_of(imag_.begin(), imag_.end(), finite))
    throw DataError("complex series contains non-finite values");
}

DesignPair::DesignPair(std::vector<double> x, std::vector<double> u)
    : x_(std::move(x)), u_(std::move(u)) {
  if (x_.size() != u_.size()) throw_shape_mismatch("phase regressor", x_.size(), u_.size());
  for (std::size_t t = 0; t < x_.size(); ++t) {
    if (!std::isfinite(x_[t]) || !std::isfinite(u_[t]))
      throw DataError("design contains non-finite values");
    sum_x_ += x_[t];
    sum_xx_ += x_[t] * x_[t];
  }
}

DesignPair build_design(std::span<const double> stimulus_convolved, PhaseRegressor mode,
                        std::optional<std::span<const double>> explicit_u) {
  if (stimulus_convolved.size() < 2) throw DataError("design needs at least two time points");
  const auto [lo, hi] = std::minmax_element(stimulus_convolved.begin(), stimulus_convolved.end());
  if (*lo == *hi) throw DataError("rank-deficient design");
  std::vector<double> x(stimulus_convolved.begin(), stimulus_convolved.end());
  std::vector<double> u;
  if (mode == PhaseRegressor::SameAsX) {
    u = x;
  } else {
    if (!explicit_u) throw ConfigError("explicit phase regressor requested but not supplied");
    u.assign(explicit_u->begin(), explicit_u->end());
  }
  return DesignPair(std::move(x), std::move(u));
}

std::vector<double> phase_basis(double gamma0, double gamma1, bool omega,
                                const DesignPair& design) {
  if (!std::isfinite(gamma0) || !std::isfinite(gamma1))
    throw NumericalError("invalid phase coefficients");
  const std::size_t T = design.time_points();
  std::vector<double> a(2 * T);
  kernels::active().phase_basis(gamma0, omega ? gamma1 : 0.0, design.u(),
                                std::span<double>(a.data(), T),
                                std::span<double>(a.data() + T, T));
  return a;
}

std::vector<double> polar_mean(const PolarCoefficients& coef, bool lambda, bool omega,
                               const DesignPair& design) {
  const std::size_t T = design.time_points();
  std::vector<double> mean = phase_basis(coef.gamma0, coef.gamma1, omega, design);
  const double slope = lambda ? coef.beta1 : 0.0;
  const auto x = design.x();
  for (std::size_t t = 0; t < T; ++t) {
    const double rho = coef.beta0 + slope * x[t];
    mean[t] *= rho;
    mean[T + t] *= rho;
  }
  return mean;
}

double arctan4(double y, double x) {
  if (x == 0.0 && y == 0.0) throw NumericalError("undefined angle");
  const double angle = std::atan2(y, x);
  return angle <= -kPi ? kPi : angle;
}

double wrap_angle(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace cvmp
