#pragma once

// Post-burn-in accumulation shared by the three samplers.

#include <cstdint>
#include <span>
#include <vector>

#include "cvmp/mcse.hpp"
#include "cvmp/sampler.hpp"

namespace cvmp::detail {

class TraceAccumulator {
public:
  TraceAccumulator(std::size_t voxels, std::size_t keep, std::size_t n_sums, bool two_indicators)
      : voxels_(voxels),
        keep_(keep),
        n_sums_(n_sums),
        sums_(voxels * n_sums, 0.0),
        ind1_(voxels * keep, 0),
        ind2_(two_indicators ? voxels * keep : 0, 0) {}

  // values: n_sums entries for voxel v at draw `draw`.
  void add(std::size_t v, std::size_t draw, std::span<const double> values, bool ind1,
           bool ind2 = false) {
    for (std::size_t k = 0; k < n_sums_; ++k) sums_[v * n_sums_ + k] += values[k];
    ind1_[v * keep_ + draw] = ind1;
    if (!ind2_.empty()) ind2_[v * keep_ + draw] = ind2;
  }

  double mean(std::size_t v, std::size_t k) const {
    return sums_[v * n_sums_ + k] / static_cast<double>(keep_);
  }
  double prob1(std::size_t v) const { return prob(ind1_, v); }
  double prob2(std::size_t v) const { return prob(ind2_, v); }
  double mcse1(std::size_t v) const { return batch_means_mcse(trace(ind1_, v)); }
  double mcse2(std::size_t v) const { return batch_means_mcse(trace(ind2_, v)); }

private:
  std::span<const std::uint8_t> trace(const std::vector<std::uint8_t>& t, std::size_t v) const {
    return {t.data() + v * keep_, keep_};
  }
  double prob(const std::vector<std::uint8_t>& t, std::size_t v) const {
    std::size_t on = 0;
    for (auto b : trace(t, v)) on += b;
    return static_cast<double>(on) / static_cast<double>(keep_);
  }

  std::size_t voxels_;
  std::size_t keep_;
  std::size_t n_sums_;
  std::vector<double> sums_;
  std::vector<std::uint8_t> ind1_;
  std::vector<std::uint8_t> ind2_;
};

PosteriorSummary empty_summary(const std::string& model, const ComplexImageSeries& data,
                               const SamplerConfig& cfg, std::size_t parcels);

}  // namespace cvmp::detail
