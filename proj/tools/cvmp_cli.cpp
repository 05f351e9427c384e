// Command-line driver: simulate, fit, metrics, repro.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cvmp/error.hpp"
#include "cvmp/kernels.hpp"
#include "cvmp/pipeline.hpp"

namespace {

using namespace cvmp;

struct SamplerFlags {
  std::string model = "cvmp";
  std::size_t parcels = 16;
  std::optional<std::size_t> iters, burnin;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::optional<double> psi_lambda, psi_omega, threshold, mh_step;
  bool literal = false;
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& f) {
  cmd->add_option("--model", f.model, "cvmp, mo or cvri")->envname("CVMP_MODEL");
  cmd->add_option("--parcels", f.parcels, "number of parcels G")->envname("CVMP_PARCELS");
  cmd->add_option("--iters", f.iters, "total MCMC iterations")->envname("CVMP_ITERS");
  cmd->add_option("--burnin", f.burnin, "burn-in iterations")->envname("CVMP_BURNIN");
  cmd->add_option("--seed", f.seed, "random seed")->envname("CVMP_SEED");
  cmd->add_option("--threads", f.threads, "worker threads")->envname("CVMP_THREADS");
  cmd->add_option("--psi-lambda", f.psi_lambda, "probit offset, magnitude indicator")
      ->envname("CVMP_PSI_LAMBDA");
  cmd->add_option("--psi-omega", f.psi_omega, "probit offset, phase indicator")
      ->envname("CVMP_PSI_OMEGA");
  cmd->add_option("--threshold", f.threshold, "posterior probability cut-off")
      ->envname("CVMP_THRESHOLD");
  cmd->add_option("--mh-step", f.mh_step, "random-walk sd for both phase coefficients")
      ->envname("CVMP_MH_STEP");
  cmd->add_flag("--literal-indicators", f.literal,
                "draw indicators from the joint-density ratio at the current slopes");
}

SamplerConfig sampler_config(const SamplerFlags& f, Model m) {
  SamplerConfig cfg = default_config(m);
  cfg.seed = f.seed;
  if (f.iters) cfg.n_iter = *f.iters;
  if (f.burnin) cfg.burn_in = *f.burnin;
  if (f.psi_lambda) cfg.psi_lambda = *f.psi_lambda;
  if (f.psi_omega) cfg.psi_omega = *f.psi_omega;
  if (f.threshold) cfg.threshold = *f.threshold;
  if (f.mh_step) cfg.mh_step_gamma0 = cfg.mh_step_gamma1 = *f.mh_step;
  if (f.literal) cfg.indicator_update = IndicatorUpdate::Literal;
  cfg.validate();
  return cfg;
}

void print_report(const std::vector<MetricsReport>& reports) {
  std::printf("%-10s", "label");
  for (const auto& n : metric_names()) std::printf(" %14s", n.c_str());
  std::printf("\n");
  for (const auto& r : reports) {
    std::printf("%-10s", r.label.c_str());
    for (const auto& n : metric_names()) {
      const auto v = metric_value(r, n);
      if (v) std::printf(" %14.4f", *v);
      else std::printf(" %14s", "NA");
    }
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian activation mapping for complex-valued image series"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "write synthetic dataset directories");
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_opt.sim.seed, "random seed")->envname("CVMP_SEED");
  sim->add_flag("--multi", sim_opt.multi, "random region maps under all three assignments");
  sim->add_option("--maps", sim_opt.n_maps, "number of random maps in --multi mode");
  sim->add_option("--sigma", sim_opt.sim.sigma, "noise standard deviation");

  SamplerFlags fit_flags;
  std::string fit_data, fit_out;
  auto* fitc = app.add_subcommand("fit", "fit a model to a dataset directory");
  fitc->add_option("--data", fit_data, "dataset directory")->required();
  fitc->add_option("--out", fit_out, "results directory")->required();
  add_sampler_flags(fitc, fit_flags);

  MetricsOptions met_opt;
  std::vector<std::string> met_results;
  std::string met_truth, met_out = ".";
  auto* met = app.add_subcommand("metrics", "score results against truth maps");
  met->add_option("--results", met_results, "results directories")->required();
  met->add_option("--truth", met_truth, "dataset directory holding the truth maps");
  met->add_option("--out", met_out, "report directory");
  met->add_flag("--aggregate", met_opt.aggregate, "also write mean(min, max, sd) rows per model");

  ReproOptions rep_opt;
  std::string rep_table = "table1", rep_out = "repro";
  auto* rep = app.add_subcommand("repro", "simulate, fit all models and score");
  rep->add_option("table", rep_table, "table1 or table3-scaled");
  rep->add_option("--out", rep_out, "report directory");
  rep->add_option("--seed", rep_opt.seed, "random seed")->envname("CVMP_SEED");
  rep->add_option("--threads", rep_opt.threads, "worker threads")->envname("CVMP_THREADS");
  rep->add_option("--parcels", rep_opt.parcels, "number of parcels G")->envname("CVMP_PARCELS");
  rep->add_option("--maps", rep_opt.maps, "random maps per assignment (table3-scaled)");
  rep->add_option("--iters", rep_opt.iters, "override iteration count")->envname("CVMP_ITERS");
  rep->add_option("--burnin", rep_opt.burn_in, "override burn-in")->envname("CVMP_BURNIN");
  bool rep_literal = false;
  rep->add_flag("--literal-indicators", rep_literal,
                "draw indicators from the joint-density ratio at the current slopes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::Config);
  }

  try {
    if (*sim) {
      sim_opt.out = sim_out;
      const auto dirs = cmd_simulate(sim_opt);
      std::printf("wrote %zu dataset(s) under %s\n", dirs.size(), sim_out.c_str());
    } else if (*fitc) {
      FitOptions opt;
      opt.model = parse_model(fit_flags.model);
      opt.parcels = fit_flags.parcels;
      opt.cfg = sampler_config(fit_flags, opt.model);
      opt.dataset = fit_data;
      opt.out = fit_out;
      opt.threads = fit_flags.threads;
      const auto s = cmd_fit(opt);
      std::printf("%s: %zu voxels, %zu parcels, %.2f s, kernels=%s\n", s.model.c_str(), s.voxels(),
                  s.parcels, s.seconds, std::string(kernels::active().name).c_str());
    } else if (*met) {
      for (const auto& r : met_results) met_opt.results.emplace_back(r);
      if (!met_truth.empty()) met_opt.truth = met_truth;
      met_opt.out = met_out;
      print_report(cmd_metrics(met_opt));
    } else if (*rep) {
      rep_opt.table = parse_repro_table(rep_table);
      rep_opt.out = rep_out;
      if (rep_literal) rep_opt.indicator_update = IndicatorUpdate::Literal;
      const auto res = cmd_repro(rep_opt);
      for (const auto& c : res.cells) {
        std::printf("[%s]\n", c.data_type.c_str());
        print_report(c.reports);
      }
      std::printf("total %.1f s\n", res.seconds);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Numerical);
  }
  return 0;
}
