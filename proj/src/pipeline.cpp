#include "cvmp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "cvmp/error.hpp"
#include "cvmp/spatial.hpp"

namespace cvmp {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTagDataset = 0x445354;  // "DST"

std::string fmt(double v) { return format_double(v); }

std::size_t parse_count(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const auto n = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(key);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw DataError("manifest field '" + key + "' is not a count: '" + text + "'");
  }
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw DataError("manifest field '" + key + "' is not a number: '" + text + "'");
  }
}

CsvMatrix rows_matrix(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
  CsvMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values = values;
  return m;
}

std::vector<double> grid_column(std::size_t V) {
  std::vector<double> g(V);
  for (std::size_t v = 0; v < V; ++v) g[v] = static_cast<double>(v);
  return g;
}

std::vector<double> to_double(const std::vector<std::uint8_t>& b) {
  return {b.begin(), b.end()};
}

std::vector<double> index_column(const std::vector<std::size_t>& idx) {
  return {idx.begin(), idx.end()};
}

// Row values scattered onto the full grid, zero where masked out.
std::vector<double> scatter(const std::vector<double>& rows, const std::vector<std::size_t>& grid,
                            std::size_t V) {
  std::vector<double> full(V, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) full[grid[r]] = rows[r];
  return full;
}

TruthMaps truth_from_columns(const GridDims& dims, std::vector<double> b1,
                             std::vector<double> g1) {
  TruthMaps t;
  t.dims = dims;
  t.active_mag.resize(b1.size());
  t.active_phase.resize(g1.size());
  for (std::size_t v = 0; v < b1.size(); ++v) t.active_mag[v] = b1[v] != 0.0;
  for (std::size_t v = 0; v < g1.size(); ++v) t.active_phase[v] = g1[v] != 0.0;
  t.beta1 = std::move(b1);
  t.gamma1 = std::move(g1);
  return t;
}

TruthMaps load_truth(const fs::path& dir, const Manifest& man, const GridDims& dims) {
  if (!man.count("truth_beta1") || !man.count("truth_gamma1"))
    throw DataError("dataset '" + dir.string() + "' has no truth maps");
  const auto b = read_csv(dir / man.at("truth_beta1"));
  const auto g = read_csv(dir / man.at("truth_gamma1"));
  auto b1 = b.column("beta1");
  auto g1 = g.column("gamma1");
  if (b1.size() != dims.voxels()) throw_shape_mismatch("truth_beta1 rows", dims.voxels(), b1.size());
  if (g1.size() != dims.voxels()) throw_shape_mismatch("truth_gamma1 rows", dims.voxels(), g1.size());
  return truth_from_columns(dims, std::move(b1), std::move(g1));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

SamplerConfig with_overrides(SamplerConfig cfg, const ReproOptions& opt, std::uint64_t seed) {
  cfg.seed = seed;
  if (opt.iters) cfg.n_iter = *opt.iters;
  if (opt.burn_in) cfg.burn_in = *opt.burn_in;
  cfg.indicator_update = opt.indicator_update;
  return cfg;
}

constexpr Model kModels[] = {Model::Mo, Model::Cvri, Model::Cvmp};

}  // namespace

void write_dataset(const fs::path& dir, const Dataset& ds) {
  const auto& d = ds.data;
  const std::size_t V = d.voxels();
  const std::size_t T = d.time_points();
  if (ds.design.time_points() != T) throw_shape_mismatch("design length", T, ds.design.time_points());
  fs::create_directories(dir);
  Manifest man = ds.manifest;
  man["format_version"] = std::to_string(kFormatVersion);
  man["dims"] = d.dims().to_string();
  man["T"] = std::to_string(T);
  man["voxels"] = std::to_string(V);
  man["real"] = "real.csv";
  man["imag"] = "imag.csv";
  man["design"] = "design.csv";
  write_csv(dir / "real.csv", rows_matrix(d.real_data(), V, T));
  write_csv(dir / "imag.csv", rows_matrix(d.imag_data(), V, T));
  std::vector<double> t(T);
  for (std::size_t i = 0; i < T; ++i) t[i] = static_cast<double>(i);
  const auto x = ds.design.x();
  const auto u = ds.design.u();
  write_csv(dir / "design.csv", make_columns({"t", "x", "u"}, {t, {x.begin(), x.end()},
                                                              {u.begin(), u.end()}}));
  if (d.masked()) {
    man["mask"] = "mask.csv";
    write_csv(dir / "mask.csv", make_columns({"voxel"}, {index_column(d.grid_indices())}));
  }
  if (ds.truth) {
    const std::size_t G = ds.truth->beta1.size();
    man["truth_beta1"] = "truth_beta1.csv";
    man["truth_gamma1"] = "truth_gamma1.csv";
    write_csv(dir / "truth_beta1.csv", make_columns({"voxel", "beta1"}, {grid_column(G), ds.truth->beta1}));
    write_csv(dir / "truth_gamma1.csv",
              make_columns({"voxel", "gamma1"}, {grid_column(G), ds.truth->gamma1}));
  }
  write_manifest(dir / "manifest.txt", man);
}

Dataset load_dataset(const fs::path& dir) {
  const auto man_path = dir / "manifest.txt";
  if (!fs::exists(man_path)) throw DataError("no manifest in '" + dir.string() + "'");
  Dataset ds;
  ds.manifest = read_manifest(man_path);
  const auto& man = ds.manifest;
  const auto version = parse_count(manifest_get(man, "format_version"), "format_version");
  if (version != static_cast<std::size_t>(kFormatVersion))
    throw DataError("unsupported format_version " + std::to_string(version));
  GridDims dims;
  try {
    dims = GridDims::parse(manifest_get(man, "dims"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("manifest dims: ") + e.what());
  }
  const std::size_t T = parse_count(manifest_get(man, "T"), "T");
  const std::size_t V = parse_count(manifest_get(man, "voxels"), "voxels");
  if (T < 3) throw DataError("need at least 3 time points");

  std::vector<std::size_t> grid;
  if (man.count("mask")) {
    const auto col = read_csv(dir / man.at("mask")).column("voxel");
    grid.reserve(col.size());
    for (double g : col) {
      if (!(g >= 0.0) || g >= static_cast<double>(dims.voxels()) || g != std::floor(g))
        throw DataError("mask index out of range");
      if (!grid.empty() && static_cast<std::size_t>(g) <= grid.back())
        throw DataError("mask indices must be strictly increasing");
      grid.push_back(static_cast<std::size_t>(g));
    }
    if (grid.size() != V) throw_shape_mismatch("mask rows", V, grid.size());
  } else if (V != dims.voxels()) {
    throw_shape_mismatch("voxels vs dims", dims.voxels(), V);
  }

  const auto re = read_csv(dir / manifest_get(man, "real"));
  const auto im = read_csv(dir / manifest_get(man, "imag"));
  for (const auto* m : {&re, &im}) {
    if (m->rows != V) throw_shape_mismatch("series rows", V, m->rows);
    if (m->cols != T) throw_shape_mismatch("series columns", T, m->cols);
    for (double v : m->values)
      if (!std::isfinite(v)) throw DataError("non-finite value in image series");
  }
  const auto design = read_csv(dir / manifest_get(man, "design"));
  if (design.rows != T) throw_shape_mismatch("design rows", T, design.rows);
  ds.design = DesignPair(design.column("x"), design.column("u"));
  ds.data = ComplexImageSeries(dims, T, re.values, im.values, std::move(grid));
  if (man.count("truth_beta1")) ds.truth = load_truth(dir, man, dims);
  return ds;
}

Manifest simulation_manifest(const SimConfig& sim, const GridDims& dims, std::size_t T,
                             Assignment assignment) {
  return {{"seed", std::to_string(sim.seed)},
          {"beta0", fmt(sim.beta0)},
          {"gamma0", fmt(sim.gamma0)},
          {"sigma", fmt(sim.sigma)},
          {"mag_scale", fmt(sim.mag_scale)},
          {"phase_scale", fmt(sim.phase_scale)},
          {"assignment", to_string(assignment)},
          {"dims", dims.to_string()},
          {"T", std::to_string(T)}};
}

std::uint64_t derived_noise_seed(std::uint64_t seed, std::size_t map, Assignment a) {
  Rng rng(seed, map * 3 + static_cast<std::size_t>(a), kTagDataset);
  return rng.engine()();
}

Dataset simulate_single(const SimConfig& sim) {
  Dataset ds;
  ds.design = simulation_design();
  ds.truth = single_simulation_truth(sim);
  ds.data = simulate_signal(*ds.truth, sim, ds.design, Assignment::Both);
  ds.manifest = simulation_manifest(sim, ds.truth->dims, ds.design.time_points(), Assignment::Both);
  return ds;
}

Dataset simulate_multi(const RandomMap& map, const SimConfig& sim, std::size_t m, Assignment a) {
  SimConfig cfg = sim;
  cfg.seed = derived_noise_seed(sim.seed, m, a);
  Dataset ds;
  ds.design = simulation_design();
  ds.truth = apply_assignment(map.truth, a);
  ds.data = simulate_signal(*ds.truth, cfg, ds.design, a);
  ds.manifest = simulation_manifest(sim, ds.truth->dims, ds.design.time_points(), a);
  ds.manifest["map"] = std::to_string(m);
  ds.manifest["noise_seed"] = std::to_string(cfg.seed);
  return ds;
}

std::vector<fs::path> cmd_simulate(const SimulateOptions& opt) {
  std::vector<fs::path> written;
  if (!opt.multi) {
    write_dataset(opt.out, simulate_single(opt.sim));
    written.push_back(opt.out);
    return written;
  }
  if (opt.assignments.empty()) throw ConfigError("no assignments requested");
  const auto maps = random_truth_maps(opt.n_maps, RandomMapSpec{}, opt.sim.seed, opt.sim.mag_scale,
                                      opt.sim.phase_scale);
  for (std::size_t m = 0; m < maps.size(); ++m) {
    for (auto a : opt.assignments) {
      char name[32];
      std::snprintf(name, sizeof name, "map_%03zu", m);
      const auto dir = opt.out / name / to_string(a);
      write_dataset(dir, simulate_multi(maps[m], opt.sim, m, a));
      written.push_back(dir);
    }
  }
  return written;
}

PosteriorSummary fit(const Dataset& ds, Model model, std::size_t parcels, const SamplerConfig& cfg,
                     std::size_t threads) {
  if (parcels == 0) throw ConfigError("parcel count must be at least 1");
  if (threads == 0) throw ConfigError("thread count must be at least 1");
  const auto parc = parcellate(ds.data.dims(), parcels);
  return run_model(model, ds.data, ds.design, parc, cfg, threads);
}

void write_results(const fs::path& dir, const PosteriorSummary& s, const Manifest& run_info) {
  fs::create_directories(dir);
  const auto vox = index_column(s.grid_index);
  const bool cvmp = s.model == "cvmp";
  const bool cvri = s.model == "cvri";
  write_csv(dir / "prob_lambda.csv", make_columns({"voxel", "prob_lambda"}, {vox, s.prob_lambda}));
  if (cvmp)
    write_csv(dir / "prob_omega.csv", make_columns({"voxel", "prob_omega"}, {vox, s.prob_omega}));
  write_csv(dir / "active_mag.csv", make_columns({"voxel", "active"}, {vox, to_double(s.active_mag)}));
  if (cvmp)
    write_csv(dir / "active_phase.csv",
              make_columns({"voxel", "active"}, {vox, to_double(s.active_phase)}));
  if (cvri)
    write_csv(dir / "mean_beta.csv",
              make_columns({"voxel", "beta_real0", "beta_real1", "beta_imag0", "beta_imag1"},
                           {vox, s.beta0, s.beta1, s.beta_imag0, s.beta_imag1}));
  else
    write_csv(dir / "mean_beta.csv", make_columns({"voxel", "beta0", "beta1"}, {vox, s.beta0, s.beta1}));
  if (cvmp)
    write_csv(dir / "mean_gamma.csv",
              make_columns({"voxel", "gamma0", "gamma1"}, {vox, s.gamma0, s.gamma1}));
  if (cvmp)
    write_csv(dir / "mcse.csv", make_columns({"voxel", "mcse_lambda", "mcse_omega", "converged"},
                                             {vox, s.mcse_lambda, s.mcse_omega, to_double(s.converged)}));
  else
    write_csv(dir / "mcse.csv", make_columns({"voxel", "mcse_lambda", "converged"},
                                             {vox, s.mcse_lambda, to_double(s.converged)}));

  const auto est = derived_estimates(s);
  if (est.gamma1)
    write_csv(dir / "estimates.csv", make_columns({"voxel", "beta1", "gamma1"}, {vox, est.beta1, *est.gamma1}));
  else
    write_csv(dir / "estimates.csv", make_columns({"voxel", "beta1"}, {vox, est.beta1}));

  Manifest conv = run_info;
  conv["model"] = s.model;
  conv["voxels"] = std::to_string(s.voxels());
  conv["parcels"] = std::to_string(s.parcels);
  conv["n_iter"] = std::to_string(s.n_iter);
  conv["burn_in"] = std::to_string(s.burn_in);
  conv["threshold"] = fmt(s.threshold);
  conv["mcse_target"] = fmt(s.mcse_target);
  conv["unconverged"] = std::to_string(s.unconverged());
  conv["mh_acceptance"] = s.mh_acceptance < 0.0 ? "NA" : fmt(s.mh_acceptance);
  std::size_t on_mag = 0, on_phase = 0;
  for (auto a : s.active_mag) on_mag += a;
  for (auto a : s.active_phase) on_phase += a;
  conv["active_mag"] = std::to_string(on_mag);
  if (cvmp) conv["active_phase"] = std::to_string(on_phase);
  write_manifest(dir / "convergence.txt", conv);
  write_text(dir / "timing.txt", "seconds=" + fmt(s.seconds) + "\n");

  const std::size_t G = s.dims.voxels();
  emit_map_image(dir / "active_mag.ppm", scatter(to_double(s.active_mag), s.grid_index, G), s.dims,
                 Palette::Binary);
  emit_map_image(dir / "beta1.ppm", scatter(est.beta1, s.grid_index, G), s.dims, Palette::Diverging);
  if (cvmp) {
    emit_map_image(dir / "active_phase.ppm", scatter(to_double(s.active_phase), s.grid_index, G),
                   s.dims, Palette::Binary);
    emit_map_image(dir / "gamma1.ppm", scatter(*est.gamma1, s.grid_index, G), s.dims,
                   Palette::Diverging);
  }
}

PosteriorSummary cmd_fit(const FitOptions& opt) {
  opt.cfg.validate();
  const auto ds = load_dataset(opt.dataset);
  auto s = fit(ds, opt.model, opt.parcels, opt.cfg, opt.threads);
  Manifest info{{"dataset", fs::absolute(opt.dataset).lexically_normal().string()},
                {"seed", std::to_string(opt.cfg.seed)},
                {"requested_parcels", std::to_string(opt.parcels)},
                {"psi_lambda", fmt(opt.cfg.psi_lambda)},
                {"psi_omega", fmt(opt.cfg.psi_omega)}};
  write_results(opt.out, s, info);
  if (s.unconverged() > 0)
    std::cerr << "warning: " << s.unconverged() << " of " << s.voxels()
              << " voxels did not reach the MCSE target\n";
  return s;
}

std::string display_name(Model m) {
  switch (m) {
    case Model::Mo: return "MO";
    case Model::Cvri: return "CV-R&I";
    case Model::Cvmp: return "CV-M&P";
  }
  return "CV-M&P";
}

Evaluation evaluation_of(const PosteriorSummary& s) {
  Evaluation e;
  e.model = s.model;
  e.grid_index = s.grid_index;
  const std::size_t V = s.voxels();
  e.predicted = s.active_mag;
  e.score = s.prob_lambda;
  if (s.model == "cvmp") {
    for (std::size_t v = 0; v < V; ++v) {
      e.predicted[v] = s.active_mag[v] || s.active_phase[v];
      e.score[v] = std::max(s.prob_lambda[v], s.prob_omega[v]);
    }
  }
  auto est = derived_estimates(s);
  e.beta1 = std::move(est.beta1);
  e.gamma1 = std::move(est.gamma1);
  e.seconds = s.seconds;
  return e;
}

Evaluation read_evaluation(const fs::path& dir) {
  const auto conv = read_manifest(dir / "convergence.txt");
  Evaluation e;
  e.model = manifest_get(conv, "model");
  const auto pl = read_csv(dir / "prob_lambda.csv");
  const auto vox = pl.column("voxel");
  e.grid_index.assign(vox.begin(), vox.end());
  e.score = pl.column("prob_lambda");
  const auto am = read_csv(dir / "active_mag.csv").column("active");
  e.predicted.assign(am.begin(), am.end());
  if (e.model == "cvmp") {
    const auto po = read_csv(dir / "prob_omega.csv").column("prob_omega");
    const auto ap = read_csv(dir / "active_phase.csv").column("active");
    if (po.size() != e.score.size() || ap.size() != e.score.size())
      throw_shape_mismatch("phase maps", e.score.size(), po.size());
    for (std::size_t v = 0; v < e.score.size(); ++v) {
      e.score[v] = std::max(e.score[v], po[v]);
      e.predicted[v] = e.predicted[v] || ap[v] != 0.0;
    }
  }
  const auto est = read_csv(dir / "estimates.csv");
  e.beta1 = est.column("beta1");
  if (est.cols > 2) e.gamma1 = est.column("gamma1");
  if (e.predicted.size() != e.score.size() || e.beta1.size() != e.score.size())
    throw_shape_mismatch("result maps", e.score.size(), e.beta1.size());
  const auto timing = dir / "timing.txt";
  if (fs::exists(timing)) e.seconds = parse_real(manifest_get(read_manifest(timing), "seconds"), "seconds");
  return e;
}

MetricsReport evaluate(const Evaluation& e, const TruthMaps& truth, const std::string& label) {
  const std::size_t V = e.grid_index.size();
  const auto any = truth.active_any();
  std::vector<std::uint8_t> t(V);
  std::vector<double> tb(V), tg(V);
  for (std::size_t r = 0; r < V; ++r) {
    const std::size_t g = e.grid_index[r];
    if (g >= any.size()) throw DataError("result voxel outside the truth grid");
    t[r] = any[g];
    tb[r] = truth.beta1[g];
    tg[r] = truth.gamma1[g];
  }
  MetricsReport rep;
  rep.label = label;
  const auto r = rates(confusion(t, e.predicted));
  rep.accuracy = r.accuracy;
  rep.precision = r.precision;
  rep.recall = r.recall;
  rep.f1 = r.f1;
  rep.degenerate = r.precision_undefined || r.recall_undefined || r.f1_undefined;
  try {
    rep.auc = auc(t, e.score);
  } catch (const DataError&) {
  }
  try {
    rep.beta1_slope = slope(tb, e.beta1);
  } catch (const DataError&) {
  }
  if (e.gamma1) {
    try {
      rep.gamma1_slope = slope(tg, *e.gamma1);
    } catch (const DataError&) {
    }
  }
  rep.runtime_seconds = e.seconds;
  return rep;
}

void write_report(const fs::path& path, std::span<const MetricsReport> reports) {
  std::string text = "label";
  for (const auto& n : metric_names()) text += "," + n;
  text += "\n";
  for (const auto& r : reports) {
    text += r.label;
    for (const auto& n : metric_names()) {
      const auto v = metric_value(r, n);
      text += "," + (v ? fmt(*v) : std::string("NA"));
    }
    text += "\n";
  }
  write_text(path, text);
}

void write_aggregate(const fs::path& path,
                     const std::vector<std::pair<std::string, std::vector<MetricsReport>>>& groups) {
  std::string text = "label,n";
  for (const auto& n : metric_names()) text += "," + n;
  text += "\n";
  for (const auto& [label, reports] : groups) {
    const auto agg = aggregate(reports);
    text += label + "," + std::to_string(reports.size());
    for (const auto& n : metric_names()) text += ",\"" + agg.at(n).format() + "\"";
    text += "\n";
  }
  write_text(path, text);
}

std::vector<MetricsReport> cmd_metrics(const MetricsOptions& opt) {
  if (opt.results.empty()) throw ConfigError("no results directories given");
  std::optional<TruthMaps> shared;
  if (opt.truth) {
    auto ds = load_dataset(*opt.truth);
    if (!ds.truth) throw DataError("dataset '" + opt.truth->string() + "' has no truth maps");
    shared = std::move(ds.truth);
  }
  std::vector<MetricsReport> reports;
  std::vector<std::pair<std::string, std::vector<MetricsReport>>> groups;
  for (const auto& dir : opt.results) {
    const auto e = read_evaluation(dir);
    TruthMaps truth;
    if (shared) {
      truth = *shared;
    } else {
      const auto conv = read_manifest(dir / "convergence.txt");
      const fs::path ds_dir = manifest_get(conv, "dataset");
      const auto man = read_manifest(ds_dir / "manifest.txt");
      truth = load_truth(ds_dir, man, GridDims::parse(manifest_get(man, "dims")));
    }
    const auto label = display_name(parse_model(e.model));
    reports.push_back(evaluate(e, truth, label));
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == label; });
    if (it == groups.end()) groups.push_back({label, {reports.back()}});
    else it->second.push_back(reports.back());
  }
  fs::create_directories(opt.out);
  write_report(opt.out / "metrics_report.csv", reports);
  if (opt.aggregate) write_aggregate(opt.out / "metrics_aggregate.csv", groups);
  return reports;
}

ReproTable parse_repro_table(const std::string& text) {
  if (text == "table1") return ReproTable::Table1;
  if (text == "table3-scaled") return ReproTable::Table3Scaled;
  throw ConfigError("unknown table '" + text + "' (table1 or table3-scaled)");
}

const ReproCell& ReproResult::cell(const std::string& data_type, Model m) const {
  for (const auto& c : cells)
    if (c.data_type == data_type && c.model == m) return c;
  throw ConfigError("no reproduction cell " + data_type + "/" + to_string(m));
}

ReproResult cmd_repro(const ReproOptions& opt) {
  if (opt.maps == 0) throw ConfigError("need at least one map");
  const auto start = std::chrono::steady_clock::now();
  ReproResult res;
  SimConfig sim;
  sim.seed = opt.seed;

  auto run_models = [&](const Dataset& ds, const std::string& type, std::uint64_t seed) {
    for (auto m : kModels) {
      const auto cfg = with_overrides(default_config(m), opt, seed);
      const auto s = fit(ds, m, opt.parcels, cfg, opt.threads);
      auto rep = evaluate(evaluation_of(s), *ds.truth, display_name(m));
      auto it = std::find_if(res.cells.begin(), res.cells.end(),
                             [&](const ReproCell& c) { return c.data_type == type && c.model == m; });
      if (it == res.cells.end()) res.cells.push_back({type, m, {rep}});
      else it->reports.push_back(rep);
    }
  };

  if (opt.table == ReproTable::Table1) {
    run_models(simulate_single(sim), "single", opt.seed);
  } else {
    const auto maps = random_truth_maps(opt.maps, RandomMapSpec{}, opt.seed, sim.mag_scale,
                                        sim.phase_scale);
    for (auto a : {Assignment::MagOnly, Assignment::PhaseOnly, Assignment::Both})
      for (std::size_t m = 0; m < maps.size(); ++m)
        run_models(simulate_multi(maps[m], sim, m, a), to_string(a),
                   derived_noise_seed(opt.seed, m, a));
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (opt.out) {
    fs::create_directories(*opt.out);
    if (opt.table == ReproTable::Table1) {
      std::vector<MetricsReport> rows;
      for (const auto& c : res.cells) rows.insert(rows.end(), c.reports.begin(), c.reports.end());
      write_report(*opt.out / "table1.csv", rows);
    } else {
      std::vector<std::pair<std::string, std::vector<MetricsReport>>> groups;
      for (const auto& c : res.cells) groups.push_back({c.data_type + " " + display_name(c.model), c.reports});
      write_aggregate(*opt.out / "table3_scaled.csv", groups);
    }
    write_text(*opt.out / "timing.txt", "seconds=" + fmt(res.seconds) + "\n");
  }
  return res;
}

}  // namespace cvmp
