#include "cvmp/mcse.hpp"

#include <cmath>
#include <vector>

namespace cvmp {
namespace {

template <typename T>
double mcse_impl(std::span<const T> trace) {
  const std::size_t n = trace.size();
  if (n < 4) return 0.0;
  const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t a = n / b;
  if (a < 2) return 0.0;
  std::vector<double> means(a, 0.0);
  double grand = 0.0;
  for (std::size_t k = 0; k < a; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += static_cast<double>(trace[k * b + i]);
    means[k] = s / static_cast<double>(b);
    grand += means[k];
  }
  grand /= static_cast<double>(a);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_hat = static_cast<double>(b) * ss / static_cast<double>(a - 1);
  return std::sqrt(var_hat / static_cast<double>(a * b));
}

}  // namespace

double batch_means_mcse(std::span<const double> trace) { return mcse_impl(trace); }
double batch_means_mcse(std::span<const std::uint8_t> trace) { return mcse_impl(trace); }

}  // namespace cvmp
