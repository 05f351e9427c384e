#include "cvmp/random.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

#include "cvmp/error.hpp"

namespace cvmp {
namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded_engine(seed, 0, 0)) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag)
    : engine_(seeded_engine(seed, stream, tag)) {}

double Rng::uniform() { return std::generate_canonical<double, 53>(engine_); }

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(scale))
    throw NumericalError("gamma variate with invalid parameters");
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

double Rng::inv_gamma(double shape, double scale) {
  if (!(scale > 0.0)) throw NumericalError("degenerate variance");
  return scale / gamma(shape, 1.0);
}

double Rng::half_normal(double sd, bool positive) {
  const double draw = sd * std::abs(normal());
  return positive ? draw : -draw;
}

double ndtr(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double log_ndtr(double z) {
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z / std::sqrt(2.0)));
  if (z > -20.0) return std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
  // Asymptotic expansion of the Mills ratio.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * 3.141592653589793) + std::log(series);
}

double ndtri(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

}  // namespace cvmp
