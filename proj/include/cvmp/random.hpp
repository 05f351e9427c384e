#pragma once

#include <cstdint>
#include <random>

namespace cvmp {

// Seeded Mersenne Twister with the handful of variates the samplers need. One instance per
// independent stream; streams are derived from (seed, stream id, purpose tag).
class Rng {
public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag);

  double uniform();  // [0, 1)
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double scale);
  // Inverse gamma with density proportional to x^(-shape-1) exp(-scale / x).
  double inv_gamma(double shape, double scale);
  // Normal(0, sd^2) truncated to (0, inf) when positive, (-inf, 0) otherwise.
  double half_normal(double sd, bool positive);

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// log Phi(z), accurate in the far left tail.
double log_ndtr(double z);
double ndtr(double z);
// Inverse standard normal CDF.
double ndtri(double p);

}  // namespace cvmp
