#include "cvmp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cvmp/error.hpp"

namespace cvmp {

ConfusionCounts confusion(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> pred) {
  if (truth.size() != pred.size()) throw_shape_mismatch("prediction map", truth.size(), pred.size());
  ConfusionCounts c;
  for (std::size_t v = 0; v < truth.size(); ++v) {
    const bool t = truth[v] != 0;
    const bool p = pred[v] != 0;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ClassificationRates rates(const ConfusionCounts& c) {
  ClassificationRates r;
  const double n = static_cast<double>(c.total());
  r.accuracy = n > 0 ? static_cast<double>(c.tp + c.tn) / n : 0.0;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else r.precision_undefined = true;
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else r.recall_undefined = true;
  if (!r.precision_undefined && !r.recall_undefined && r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else r.f1_undefined = true;
  return r;
}

double auc(std::span<const std::uint8_t> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw_shape_mismatch("scores", truth.size(), scores.size());
  const std::size_t n = truth.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Midranks over tie groups.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]]) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("AUC undefined");
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double slope(std::span<const double> truth, std::span<const double> estimates) {
  if (truth.size() != estimates.size())
    throw_shape_mismatch("estimates", truth.size(), estimates.size());
  const double n = static_cast<double>(truth.size());
  if (truth.size() < 2) throw DataError("slope needs at least two values");
  const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  const double me = std::accumulate(estimates.begin(), estimates.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t v = 0; v < truth.size(); ++v) {
    sxy += (truth[v] - mt) * (estimates[v] - me);
    sxx += (truth[v] - mt) * (truth[v] - mt);
  }
  if (!(sxx > 0.0)) throw DataError("slope undefined: truth has zero variance");
  return sxy / sxx;
}

std::string AggregateStat::format() const {
  if (count == 0) return "NA";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f(%.4f, %.4f, %.4f)", mean, min, max, sd);
  return buf;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "accuracy", "precision", "recall", "f1", "auc", "beta1_slope", "gamma1_slope",
      "runtime_seconds"};
  return names;
}

std::optional<double> metric_value(const MetricsReport& r, const std::string& name) {
  if (name == "accuracy") return r.accuracy;
  if (name == "precision") return r.precision;
  if (name == "recall") return r.recall;
  if (name == "f1") return r.f1;
  if (name == "auc") return r.auc;
  if (name == "beta1_slope") return r.beta1_slope;
  if (name == "gamma1_slope") return r.gamma1_slope;
  if (name == "runtime_seconds") return r.runtime_seconds;
  throw ConfigError("unknown metric '" + name + "'");
}

std::map<std::string, AggregateStat> aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw DataError("nothing to aggregate");
  std::map<std::string, AggregateStat> out;
  for (const auto& name : metric_names()) {
    std::vector<double> xs;
    for (const auto& r : reports)
      if (auto v = metric_value(r, name)) xs.push_back(*v);
    AggregateStat a;
    a.count = xs.size();
    if (!xs.empty()) {
      a.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      a.min = *std::min_element(xs.begin(), xs.end());
      a.max = *std::max_element(xs.begin(), xs.end());
      double ss = 0.0;
      for (double x : xs) ss += (x - a.mean) * (x - a.mean);
      a.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    }
    out[name] = a;
  }
  return out;
}

}  // namespace cvmp
