#include "cvmp/baselines.hpp"

#include <chrono>
#include <cmath>

#include "chain_accumulator.hpp"
#include "cvmp/error.hpp"
#include "cvmp/kernels.hpp"
#include "cvmp/parcel_runner.hpp"

namespace cvmp {
namespace {

constexpr std::uint64_t kTagMo = 0x4d4f;      // "MO"
constexpr std::uint64_t kTagCvri = 0x43565249;  // "CVRI"

double regression_rss(const std::array<double, 2>& b, bool lambda, double sum, double xsum,
                      double sq, const DesignPair& design) {
  const double T = static_cast<double>(design.time_points());
  const double b1 = lambda ? b[1] : 0.0;
  return sq - 2.0 * (b[0] * sum + b1 * xsum) + b[0] * b[0] * T +
         2.0 * b[0] * b1 * design.sum_x() + b1 * b1 * design.sum_xx();
}

// Least squares of y on [1, x] from sufficient statistics.
std::array<double, 2> least_squares(double sum, double xsum, const DesignPair& design) {
  const double T = static_cast<double>(design.time_points());
  const double det = T * design.sum_xx() - design.sum_x() * design.sum_x();
  if (!(det > 0.0)) throw DataError("rank-deficient design");
  return {(design.sum_xx() * sum - design.sum_x() * xsum) / det,
          (T * xsum - design.sum_x() * sum) / det};
}

void update_field(std::vector<double>& eta_buf, const std::vector<double>& eta_src,
                  const ParcelGraph& graph, const FieldPrior& prior, Eigen::VectorXd& delta,
                  double& kappa, Rng& rng) {
  eta_buf = eta_src;
  const Eigen::Map<const Eigen::VectorXd> eta(eta_buf.data(),
                                              static_cast<Eigen::Index>(eta_buf.size()));
  delta = sample_delta(eta, graph, kappa, rng);
  kappa = sample_kappa(eta_buf, graph.leverage, prior, rng);
}

}  // namespace

std::string to_string(Model m) {
  switch (m) {
    case Model::Cvmp: return "cvmp";
    case Model::Mo: return "mo";
    case Model::Cvri: return "cvri";
  }
  return "cvmp";
}

Model parse_model(const std::string& text) {
  if (text == "cvmp") return Model::Cvmp;
  if (text == "mo") return Model::Mo;
  if (text == "cvri") return Model::Cvri;
  throw ConfigError("unknown model '" + text + "'");
}

SamplerConfig default_config(Model m) {
  SamplerConfig cfg;
  switch (m) {
    case Model::Cvmp:
      cfg.psi_lambda = cfg.psi_omega = ndtri(0.42);
      cfg.threshold = 0.925;
      break;
    case Model::Mo:
      cfg.psi_lambda = cfg.psi_omega = ndtri(0.35);
      cfg.threshold = 0.8722;
      break;
    case Model::Cvri:
      cfg.psi_lambda = cfg.psi_omega = ndtri(0.30);
      cfg.threshold = 0.8722;
      break;
  }
  return cfg;
}

std::vector<double> magnitude_series(const ComplexImageSeries& data) {
  std::vector<double> out(data.real_data().size());
  kernels::active().magnitude(data.real_data(), data.imag_data(), out);
  return out;
}

double mo_log_ratio_lambda(const MoVoxelState& s, double p1, const DesignPair& design,
                           double tau2) {
  VoxelState v;
  v.beta = s.beta;
  v.sigma2 = s.sigma2;
  return log_ratio_lambda(v, p1, design, tau2);
}

double cvri_log_ratio_lambda(const CvriVoxelState& s, double p1r, double p1i,
                             const DesignPair& design, double tau2) {
  auto part = [&](const std::array<double, 2>& b, double p1) {
    const double lik =
        2.0 * b[1] * p1 - 2.0 * b[0] * b[1] * design.sum_x() - b[1] * b[1] * design.sum_xx();
    return -lik / (2.0 * s.sigma2) + b[1] * b[1] / (2.0 * tau2);
  };
  return std::log(2.0 * kPi * tau2) + part(s.beta_r, p1r) + part(s.beta_i, p1i);
}

IgParams mo_tau2_params(std::span<const MoVoxelState> voxels) {
  double shape = 0.0;
  double ss = 0.0;
  for (const auto& s : voxels) {
    shape += 1.0 + (s.lambda ? 1.0 : 0.0);
    const double b1 = s.lambda ? s.beta[1] : 0.0;
    ss += s.beta[0] * s.beta[0] + b1 * b1;
  }
  return {0.5 * shape, 0.5 * ss};
}

IgParams cvri_tau2_params(std::span<const CvriVoxelState> voxels) {
  double shape = 0.0;
  double ss = 0.0;
  for (const auto& s : voxels) {
    shape += 2.0 + (s.lambda ? 2.0 : 0.0);
    ss += s.beta_r[0] * s.beta_r[0] + s.beta_i[0] * s.beta_i[0];
    if (s.lambda) ss += s.beta_r[1] * s.beta_r[1] + s.beta_i[1] * s.beta_i[1];
  }
  return {0.5 * shape, 0.5 * ss};
}

// ---------------------------------------------------------------- MO

MoChain::MoChain(const ComplexImageSeries& data, const DesignPair& design,
                 std::vector<std::size_t> rows, const ParcelGraph& graph,
                 const SamplerConfig& cfg, std::uint64_t stream)
    : design_(design), graph_(graph), cfg_(cfg), rng_(cfg.seed, stream, kTagMo) {
  if (data.time_points() != design.time_points())
    throw_shape_mismatch("design length", data.time_points(), design.time_points());
  const std::size_t T = design.time_points();
  const auto x = design.x();
  std::vector<double> mag(T);
  for (std::size_t r : rows) {
    kernels::active().magnitude(data.real(r), data.imag(r), mag);
    Stats st;
    for (std::size_t t = 0; t < T; ++t) {
      st.sum += mag[t];
      st.xsum += x[t] * mag[t];
      st.sq += mag[t] * mag[t];
    }
    stats_.push_back(st);
    MoVoxelState s;
    s.beta = least_squares(st.sum, st.xsum, design);
    s.lambda = true;
    const double rss = std::max(regression_rss(s.beta, true, st.sum, st.xsum, st.sq, design), 0.0);
    s.sigma2 = std::max(rss / static_cast<double>(T), kSigma2Floor);
    voxels_.push_back(s);
  }
  kappa_ = cfg.field.a_kappa * cfg.field.b_kappa;
  delta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.q));
}

void MoChain::sweep() {
  const double T = static_cast<double>(design_.time_points());
  for (std::size_t v = 0; v < voxels_.size(); ++v) {
    auto& s = voxels_[v];
    const auto& st = stats_[v];
    try {
      double lr;
      if (cfg_.indicator_update == IndicatorUpdate::Collapsed) {
        lr = log_marginal_magnitude(false, st.sum, st.xsum, st.sq, design_, s.sigma2, tau2_) -
             log_marginal_magnitude(true, st.sum, st.xsum, st.sq, design_, s.sigma2, tau2_);
      } else {
        MoVoxelState at = s;
        if (!s.lambda) at.beta[1] = 0.0;
        lr = mo_log_ratio_lambda(at, st.xsum, design_, tau2_);
      }
      s.lambda = rng_.uniform() < indicator_probability(lr, cfg_.psi_lambda + s.eta);
      s.beta = draw_regression(s.lambda, st.sum, st.xsum, s.sigma2, tau2_, design_, rng_);
      if (!cfg_.freeze_hyper) {
        const double rss = regression_rss(s.beta, s.lambda, st.sum, st.xsum, st.sq, design_);
        s.sigma2 = std::max(rng_.inv_gamma(0.5 * T, 0.5 * std::max(rss, 0.0)), kSigma2Floor);
        s.eta = sample_eta(s.lambda, graph_.leverage(static_cast<Eigen::Index>(v)), kappa_, rng_);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("voxel " + std::to_string(v) + ": " + e.what());
    }
  }
  if (cfg_.freeze_hyper) return;
  const auto ig = mo_tau2_params(voxels_);
  tau2_ = rng_.inv_gamma(ig.shape, ig.scale);
  std::vector<double> eta(voxels_.size());
  for (std::size_t v = 0; v < voxels_.size(); ++v) eta[v] = voxels_[v].eta;
  update_field(eta_buf_, eta, graph_, cfg_.field, delta_, kappa_, rng_);
}

// ---------------------------------------------------------------- CV-R&I

CvriChain::CvriChain(const ComplexImageSeries& data, const DesignPair& design,
                     std::vector<std::size_t> rows, const ParcelGraph& graph,
                     const SamplerConfig& cfg, std::uint64_t stream)
    : design_(design), graph_(graph), cfg_(cfg), rng_(cfg.seed, stream, kTagCvri) {
  if (data.time_points() != design.time_points())
    throw_shape_mismatch("design length", data.time_points(), design.time_points());
  const std::size_t T = design.time_points();
  const auto x = design.x();
  for (std::size_t r : rows) {
    const auto re = data.real(r);
    const auto im = data.imag(r);
    Stats st;
    for (std::size_t t = 0; t < T; ++t) {
      st.yy += re[t] * re[t] + im[t] * im[t];
      st.sum_r += re[t];
      st.sum_i += im[t];
      st.x_r += x[t] * re[t];
      st.x_i += x[t] * im[t];
    }
    stats_.push_back(st);
    CvriVoxelState s;
    s.beta_r = least_squares(st.sum_r, st.x_r, design);
    s.beta_i = least_squares(st.sum_i, st.x_i, design);
    s.lambda = true;
    const double rss = regression_rss(s.beta_r, true, st.sum_r, st.x_r, 0.0, design) +
                       regression_rss(s.beta_i, true, st.sum_i, st.x_i, 0.0, design) + st.yy;
    s.sigma2 = std::max(std::max(rss, 0.0) / (2.0 * T), kSigma2Floor);
    voxels_.push_back(s);
  }
  kappa_ = cfg.field.a_kappa * cfg.field.b_kappa;
  delta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.q));
}

void CvriChain::sweep() {
  const double T = static_cast<double>(design_.time_points());
  for (std::size_t v = 0; v < voxels_.size(); ++v) {
    auto& s = voxels_[v];
    const auto& st = stats_[v];
    try {
      double lr;
      if (cfg_.indicator_update == IndicatorUpdate::Collapsed) {
        auto lm = [&](bool on) {
          return log_marginal_magnitude(on, st.sum_r, st.x_r, 0.0, design_, s.sigma2, tau2_) +
                 log_marginal_magnitude(on, st.sum_i, st.x_i, 0.0, design_, s.sigma2, tau2_);
        };
        lr = lm(false) - lm(true);
      } else {
        CvriVoxelState at = s;
        if (!s.lambda) at.beta_r[1] = at.beta_i[1] = 0.0;
        lr = cvri_log_ratio_lambda(at, st.x_r, st.x_i, design_, tau2_);
      }
      s.lambda = rng_.uniform() < indicator_probability(lr, cfg_.psi_lambda + s.eta);
      s.beta_r = draw_regression(s.lambda, st.sum_r, st.x_r, s.sigma2, tau2_, design_, rng_);
      s.beta_i = draw_regression(s.lambda, st.sum_i, st.x_i, s.sigma2, tau2_, design_, rng_);
      if (!cfg_.freeze_hyper) {
        const double rss = regression_rss(s.beta_r, s.lambda, st.sum_r, st.x_r, 0.0, design_) +
                           regression_rss(s.beta_i, s.lambda, st.sum_i, st.x_i, 0.0, design_) +
                           st.yy;
        s.sigma2 = std::max(rng_.inv_gamma(T, 0.5 * std::max(rss, 0.0)), kSigma2Floor);
        s.eta = sample_eta(s.lambda, graph_.leverage(static_cast<Eigen::Index>(v)), kappa_, rng_);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("voxel " + std::to_string(v) + ": " + e.what());
    }
  }
  if (cfg_.freeze_hyper) return;
  const auto ig = cvri_tau2_params(voxels_);
  tau2_ = rng_.inv_gamma(ig.shape, ig.scale);
  std::vector<double> eta(voxels_.size());
  for (std::size_t v = 0; v < voxels_.size(); ++v) eta[v] = voxels_[v].eta;
  update_field(eta_buf_, eta, graph_, cfg_.field, delta_, kappa_, rng_);
}

// ---------------------------------------------------------------- drivers

namespace {

template <typename Chain, typename Record>
PosteriorSummary run_conjugate(const std::string& name, const ComplexImageSeries& data,
                               const DesignPair& design, const Parcellation& parc,
                               const SamplerConfig& cfg, std::size_t threads,
                               std::size_t n_sums, Record record) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto tasks = parcel_tasks(data, parc);
  PosteriorSummary out = detail::empty_summary(name, data, cfg, tasks.size());
  if (n_sums == 4) {
    out.beta_imag0.assign(data.voxels(), 0.0);
    out.beta_imag1.assign(data.voxels(), 0.0);
  }
  const std::size_t keep = cfg.n_iter - cfg.burn_in;

  for_each_parcel(tasks.size(), threads, [&](std::size_t k) {
    const auto& task = tasks[k];
    const ParcelGraph graph =
        build_parcel_graph(data.dims(), task.grid, cfg.basis_size, cfg.neighborhood);
    Chain chain(data, design, task.rows, graph, cfg, task.id);
    const std::size_t n = task.rows.size();
    detail::TraceAccumulator acc(n, keep, n_sums, false);
    std::vector<double> vals(n_sums);
    for (std::size_t it = 0; it < cfg.n_iter; ++it) {
      chain.sweep();
      if (it < cfg.burn_in) continue;
      for (std::size_t v = 0; v < n; ++v) {
        const auto& s = chain.voxels()[v];
        record(s, vals);
        acc.add(v, it - cfg.burn_in, vals, s.lambda);
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t r = task.rows[v];
      out.beta0[r] = acc.mean(v, 0);
      out.beta1[r] = acc.mean(v, 1);
      if (n_sums == 4) {
        out.beta_imag0[r] = acc.mean(v, 2);
        out.beta_imag1[r] = acc.mean(v, 3);
      }
      out.prob_lambda[r] = acc.prob1(v);
      out.active_mag[r] = out.prob_lambda[r] > cfg.threshold;
      out.mcse_lambda[r] = acc.mcse1(v);
      out.converged[r] = out.mcse_lambda[r] < cfg.mcse_target;
    }
  });
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

PosteriorSummary run_mo(const ComplexImageSeries& data, const DesignPair& design,
                        const Parcellation& parc, const SamplerConfig& cfg,
                        std::size_t threads) {
  return run_conjugate<MoChain>("mo", data, design, parc, cfg, threads, 2,
                                [](const MoVoxelState& s, std::vector<double>& vals) {
                                  vals[0] = s.beta[0];
                                  vals[1] = s.beta[1];
                                });
}

PosteriorSummary run_cvri(const ComplexImageSeries& data, const DesignPair& design,
                          const Parcellation& parc, const SamplerConfig& cfg,
                          std::size_t threads) {
  return run_conjugate<CvriChain>("cvri", data, design, parc, cfg, threads, 4,
                                  [](const CvriVoxelState& s, std::vector<double>& vals) {
                                    vals[0] = s.beta_r[0];
                                    vals[1] = s.beta_r[1];
                                    vals[2] = s.beta_i[0];
                                    vals[3] = s.beta_i[1];
                                  });
}

PosteriorSummary run_model(Model m, const ComplexImageSeries& data, const DesignPair& design,
                           const Parcellation& parc, const SamplerConfig& cfg,
                           std::size_t threads) {
  switch (m) {
    case Model::Cvmp: return run_chain(data, design, parc, cfg, threads);
    case Model::Mo: return run_mo(data, design, parc, cfg, threads);
    case Model::Cvri: return run_cvri(data, design, parc, cfg, threads);
  }
  throw ConfigError("unknown model");
}

DerivedEstimates derived_estimates(const PosteriorSummary& summary) {
  DerivedEstimates est;
  const std::size_t V = summary.voxels();
  if (summary.model == "cvmp") {
    est.beta1 = summary.beta1;
    est.gamma1 = summary.gamma1;
  } else if (summary.model == "mo") {
    est.beta1 = summary.beta1;
  } else if (summary.model == "cvri") {
    est.beta1.resize(V);
    std::vector<double> g(V, 0.0);
    for (std::size_t v = 0; v < V; ++v) {
      const double r1 = summary.beta1[v];
      const double i1 = summary.beta_imag1[v];
      est.beta1[v] = std::hypot(r1, i1);
      if (summary.active_mag[v] && (r1 != 0.0 || i1 != 0.0)) g[v] = arctan4(i1, r1);
    }
    est.gamma1 = std::move(g);
  } else {
    throw ConfigError("unknown model '" + summary.model + "'");
  }
  return est;
}

}  // namespace cvmp
