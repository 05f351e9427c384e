#pragma once

// End-to-end commands: dataset simulation and loading, model fitting, metrics, and the
// reproduction runs. Every command writes its files only after all computation is done.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvmp/baselines.hpp"
#include "cvmp/io.hpp"
#include "cvmp/metrics.hpp"
#include "cvmp/simulator.hpp"

namespace cvmp {

inline constexpr int kFormatVersion = 1;

struct Dataset {
  ComplexImageSeries data;
  DesignPair design;
  std::optional<TruthMaps> truth;
  Manifest manifest;
};

// real.csv / imag.csv (V rows x T columns), design.csv (t,x,u), truth maps when given, manifest.
void write_dataset(const std::filesystem::path& dir, const Dataset& ds);
// Validates every referenced file against the manifest shapes before returning.
Dataset load_dataset(const std::filesystem::path& dir);

Manifest simulation_manifest(const SimConfig& sim, const GridDims& dims, std::size_t T,
                             Assignment assignment);

// Noise seed for map m under assignment a in multi-simulation mode.
std::uint64_t derived_noise_seed(std::uint64_t seed, std::size_t map, Assignment a);

Dataset simulate_single(const SimConfig& sim);
// Map m, assignment a of the multi-simulation batch.
Dataset simulate_multi(const RandomMap& map, const SimConfig& sim, std::size_t m, Assignment a);

struct SimulateOptions {
  SimConfig sim;
  std::filesystem::path out;
  bool multi = false;
  std::size_t n_maps = 100;
  std::vector<Assignment> assignments{Assignment::MagOnly, Assignment::PhaseOnly,
                                      Assignment::Both};
};

// Returns the dataset directories written.
std::vector<std::filesystem::path> cmd_simulate(const SimulateOptions& opt);

struct FitOptions {
  Model model = Model::Cvmp;
  std::size_t parcels = 16;
  SamplerConfig cfg = default_config(Model::Cvmp);
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::size_t threads = 1;
};

PosteriorSummary fit(const Dataset& ds, Model model, std::size_t parcels, const SamplerConfig& cfg,
                     std::size_t threads);

// Result files. timing.txt is the only one that depends on wall-clock time.
void write_results(const std::filesystem::path& dir, const PosteriorSummary& s,
                   const Manifest& run_info);
PosteriorSummary cmd_fit(const FitOptions& opt);

std::string display_name(Model m);  // "MO", "CV-R&I", "CV-M&P"

// Inputs to the classification metrics, from a summary or from a results directory.
struct Evaluation {
  std::string model;
  std::vector<std::size_t> grid_index;
  std::vector<std::uint8_t> predicted;  // cvmp: either indicator declared active
  std::vector<double> score;            // cvmp: max of the two probabilities
  std::vector<double> beta1;
  std::optional<std::vector<double>> gamma1;
  double seconds = 0.0;
};

Evaluation evaluation_of(const PosteriorSummary& s);
Evaluation read_evaluation(const std::filesystem::path& results_dir);

// Truth activity is the union of magnitude and phase activity. Slopes are absent when the truth
// has no spread or the model has no estimate.
MetricsReport evaluate(const Evaluation& e, const TruthMaps& truth, const std::string& label);

void write_report(const std::filesystem::path& path, std::span<const MetricsReport> reports);
// One row per group: label followed by "mean(min, max, sd)" fields.
void write_aggregate(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, std::vector<MetricsReport>>>& groups);

struct MetricsOptions {
  std::vector<std::filesystem::path> results;
  std::optional<std::filesystem::path> truth;  // dataset dir; default: the one each fit used
  std::filesystem::path out;
  bool aggregate = false;
};

std::vector<MetricsReport> cmd_metrics(const MetricsOptions& opt);

enum class ReproTable { Table1, Table3Scaled };
ReproTable parse_repro_table(const std::string& text);

struct ReproOptions {
  ReproTable table = ReproTable::Table1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t maps = 10;
  std::size_t parcels = 16;
  std::optional<std::size_t> iters;  // override every model's iteration count
  std::optional<std::size_t> burn_in;
  IndicatorUpdate indicator_update = IndicatorUpdate::Collapsed;
  std::optional<std::filesystem::path> out;
};

struct ReproCell {
  std::string data_type;  // "single" or an assignment name
  Model model = Model::Cvmp;
  std::vector<MetricsReport> reports;
};

struct ReproResult {
  std::vector<ReproCell> cells;
  double seconds = 0.0;

  const ReproCell& cell(const std::string& data_type, Model m) const;
};

ReproResult cmd_repro(const ReproOptions& opt);

}  // namespace cvmp
