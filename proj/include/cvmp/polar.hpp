#pragma once

// Polar magnitude/phase signal model shared by the simulator and the samplers.
//
// A voxel's complex series is stacked as y = [y_R; y_I] (length 2T) and modelled as
//   y_R,t = (b0 + x_t b1) cos(g0 + u_t g1) + e,   y_I,t = (b0 + x_t b1) sin(g0 + u_t g1) + e.
// The phase basis a = [cos(U g); sin(U g)] turns the mean into a Hadamard product
// (b0 + b1 x*) .* a, where x* = [x; x].

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cvmp {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct GridDims {
  std::vector<std::size_t> extent;  // x fastest: v = x + nx * (y + ny * z)

  std::size_t voxels() const;
  std::size_t rank() const { return extent.size(); }
  std::string to_string() const;  // "50x50", "96x96x6"
  static GridDims parse(const std::string& text);
  bool operator==(const GridDims&) const = default;
};

class ComplexImageSeries {
public:
  ComplexImageSeries() = default;
  // real/imag are V x T row-major. grid_index maps row -> linear grid index when a mask is
  // attached; leave empty for a full grid.
  ComplexImageSeries(GridDims dims, std::size_t time_points, std::vector<double> real,
                     std::vector<double> imag, std::vector<std::size_t> grid_index = {});

  std::size_t voxels() const { return voxels_; }
  std::size_t time_points() const { return time_points_; }
  const GridDims& dims() const { return dims_; }
  bool masked() const { return !grid_index_.empty(); }
  std::size_t grid_index(std::size_t row) const { return masked() ? grid_index_[row] : row; }
  const std::vector<std::size_t>& grid_indices() const { return grid_index_; }

  std::span<const double> real(std::size_t v) const {
    return {real_.data() + v * time_points_, time_points_};
  }
  std::span<const double> imag(std::size_t v) const {
    return {imag_.data() + v * time_points_, time_points_};
  }
  const std::vector<double>& real_data() const { return real_; }
  const std::vector<double>& imag_data() const { return imag_; }

private:
  GridDims dims_;
  std::size_t voxels_ = 0;
  std::size_t time_points_ = 0;
  std::vector<double> real_;
  std::vector<double> imag_;
  std::vector<std::size_t> grid_index_;
};

// Magnitude design X = [1, x] and phase design U = [1, u].
class DesignPair {
public:
  DesignPair() = default;
  DesignPair(std::vector<double> x, std::vector<double> u);

  std::size_t time_points() const { return x_.size(); }
  std::span<const double> x() const { return x_; }
  std::span<const double> u() const { return u_; }
  double sum_x() const { return sum_x_; }
  double sum_xx() const { return sum_xx_; }

private:
  std::vector<double> x_;
  std::vector<double> u_;
  double sum_x_ = 0.0;
  double sum_xx_ = 0.0;
};

struct PolarCoefficients {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
};

enum class PhaseRegressor { SameAsX, Explicit };

DesignPair build_design(std::span<const double> stimulus_convolved, PhaseRegressor mode,
                        std::optional<std::span<const double>> explicit_u = std::nullopt);

// a = [cos(g0 + u g1 w); sin(g0 + u g1 w)], w the phase indicator.
std::vector<double> phase_basis(double gamma0, double gamma1, bool omega, const DesignPair& design);

// Fast-path mean (b0 + b1 lambda x*) .* a, length 2T.
std::vector<double> polar_mean(const PolarCoefficients& coef, bool lambda, bool omega,
                               const DesignPair& design);

// Four-quadrant arctangent with codomain (-pi, pi].
double arctan4(double y, double x);

double wrap_angle(double theta);

}  // namespace cvmp
