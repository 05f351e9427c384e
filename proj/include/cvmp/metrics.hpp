#pragma once

// Classification and estimation metrics, and aggregation over repeated simulations.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cvmp {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> pred);

// Derived rates. Zero denominators give 0 and set the matching flag.
struct ClassificationRates {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};
ClassificationRates rates(const ConfusionCounts& c);

// Mann-Whitney AUC, ties counted one half. Throws when truth has a single class.
double auc(std::span<const std::uint8_t> truth, std::span<const double> scores);

// OLS slope (with intercept) of estimates on truth. Throws when truth has no spread.
double slope(std::span<const double> truth, std::span<const double> estimates);

struct MetricsReport {
  std::string label;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  std::optional<double> auc;  // absent when truth has a single class
  std::optional<double> beta1_slope;
  std::optional<double> gamma1_slope;
  double runtime_seconds = 0.0;
  bool degenerate = false;  // some rate had a zero denominator
};

struct AggregateStat {
  std::size_t count = 0;  // reports in which the metric was present
  double mean = 0.0, min = 0.0, max = 0.0, sd = 0.0;
  std::string format() const;  // "m(min, max, sd)" or "NA"
};

// Column order used by every report: accuracy, precision, recall, f1, auc, beta1_slope,
// gamma1_slope, runtime_seconds.
const std::vector<std::string>& metric_names();
std::optional<double> metric_value(const MetricsReport& r, const std::string& name);

// Sample sd (n - 1); 0 for a single report.
std::map<std::string, AggregateStat> aggregate(std::span<const MetricsReport> reports);

}  // namespace cvmp
