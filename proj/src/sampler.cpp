#include "cvmp/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "chain_accumulator.hpp"
#include "cvmp/error.hpp"
#include "cvmp/parcel_runner.hpp"

namespace cvmp {
namespace {

constexpr std::uint64_t kTagCvmp = 0x43564d50;  // "CVMP"
constexpr double kLog2Pi = 1.8378770664093454836;

double slope_on(const VoxelState& s) { return s.lambda ? s.beta[1] : 0.0; }

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * d * d / var;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

void SamplerConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
  if (n_iter == 0 || burn_in >= n_iter) throw ConfigError("need n_iter > burn_in >= 0");
  if (!(mh_step_gamma0 >= 0.0) || !(mh_step_gamma1 >= 0.0))
    throw ConfigError("MH step sizes must be non-negative");
  if (!std::isfinite(psi_lambda) || !std::isfinite(psi_omega))
    throw ConfigError("probit offsets must be finite");
  if (!(field.a_kappa > 0.0) || !(field.b_kappa > 0.0))
    throw ConfigError("kappa prior parameters must be positive");
  if (!(mcse_target > 0.0)) throw ConfigError("MCSE target must be positive");
}

VoxelStats voxel_stats(std::span<const double> re, std::span<const double> im,
                       const DesignPair& design) {
  const std::size_t T = design.time_points();
  if (re.size() != T) throw_shape_mismatch("voxel series", T, re.size());
  if (im.size() != T) throw_shape_mismatch("voxel series", T, im.size());
  const auto x = design.x();
  const auto u = design.u();
  VoxelStats st;
  for (std::size_t t = 0; t < T; ++t) {
    const double r = re[t];
    const double i = im[t];
    const double xu = x[t] * u[t];
    const double uu = u[t] * u[t];
    st.yy += r * r + i * i;
    st.sum_r += r;
    st.sum_i += i;
    st.x_r += x[t] * r;
    st.x_i += x[t] * i;
    st.u_r += u[t] * r;
    st.u_i += u[t] * i;
    st.xu_r += xu * r;
    st.xu_i += xu * i;
    st.uu_r += uu * r;
    st.uu_i += uu * i;
    st.xuu_r += x[t] * uu * r;
    st.xuu_i += x[t] * uu * i;
  }
  return st;
}

Projection project(const VoxelData& data, const DesignPair& design, double gamma0, double gamma1) {
  if (gamma1 == 0.0) {
    const double c = std::cos(gamma0);
    const double s = std::sin(gamma0);
    return {c * data.stats.sum_r + s * data.stats.sum_i, c * data.stats.x_r + s * data.stats.x_i};
  }
  return kernels::active().phase_projection(gamma0, gamma1, design.u(), design.x(), data.re,
                                            data.im);
}

double log_ratio_lambda(const VoxelState& s, double p1, const DesignPair& design, double tau2) {
  const double b0 = s.beta[0];
  const double b1 = s.beta[1];
  const double lik = 2.0 * b1 * p1 - 2.0 * b0 * b1 * design.sum_x() - b1 * b1 * design.sum_xx();
  return 0.5 * std::log(2.0 * kPi * tau2) - lik / (2.0 * s.sigma2) + b1 * b1 / (2.0 * tau2);
}

double log_marginal_magnitude(bool lambda, double p0, double p1, double yy,
                              const DesignPair& design, double sigma2, double tau2) {
  const double T = static_cast<double>(design.time_points());
  const double base = -yy / (2.0 * sigma2);
  if (!lambda) {
    const double prec = T / sigma2 + 1.0 / tau2;
    const double h = p0 / sigma2;
    return base - 0.5 * std::log(tau2) - 0.5 * std::log(prec) + 0.5 * h * h / prec;
  }
  const double a = T / sigma2 + 1.0 / tau2;
  const double b = design.sum_x() / sigma2;
  const double d = design.sum_xx() / sigma2 + 1.0 / tau2;
  const double det = a * d - b * b;
  if (!(det > 0.0)) throw NumericalError("singular magnitude precision");
  const double h0 = p0 / sigma2;
  const double h1 = p1 / sigma2;
  const double quad = (d * h0 * h0 - 2.0 * b * h0 * h1 + a * h1 * h1) / det;
  return base - std::log(tau2) - 0.5 * std::log(det) + 0.5 * quad;
}

double log_ratio_omega(const VoxelState& s, const Projection& at_gamma, const Projection& at_zero,
                       double xi2) {
  const double b1 = slope_on(s);
  const double g1 = s.gamma[1];
  const double lik = s.beta[0] * (at_zero.p0 - at_gamma.p0) + b1 * (at_zero.p1 - at_gamma.p1);
  return 0.5 * std::log(2.0 * kPi * xi2) + lik / s.sigma2 + g1 * g1 / (2.0 * xi2);
}

Gaussian1 phase_slope_pseudo_prior(const VoxelState& s, const VoxelStats& st, double xi2) {
  const double c = std::cos(s.gamma[0]);
  const double sn = std::sin(s.gamma[0]);
  const double b0 = s.beta[0];
  const double b1 = slope_on(s);
  const double g = (b0 * (-sn * st.u_r + c * st.u_i) + b1 * (-sn * st.xu_r + c * st.xu_i)) / s.sigma2;
  const double h = (b0 * (c * st.uu_r + sn * st.uu_i) + b1 * (c * st.xuu_r + sn * st.xuu_i)) / s.sigma2;
  const double prec = std::max(h, 0.0) + 1.0 / xi2;
  return {g / prec, 1.0 / prec};
}

double log_mh_ratio(const VoxelState& s, const Projection& current, const Projection& proposed,
                    const std::array<double, 2>& proposal, double xi2) {
  const double b1 = slope_on(s);
  const double lik = s.beta[0] * (proposed.p0 - current.p0) + b1 * (proposed.p1 - current.p1);
  const double w = s.omega ? 1.0 : 0.0;
  const double q_new = proposal[0] * proposal[0] + w * proposal[1] * proposal[1];
  const double q_old = s.gamma[0] * s.gamma[0] + w * s.gamma[1] * s.gamma[1];
  return lik / s.sigma2 - (q_new - q_old) / (2.0 * xi2);
}

double indicator_probability(double log_l0_over_l1, double z) {
  if (std::isnan(log_l0_over_l1) || std::isnan(z))
    throw NumericalError("non-finite indicator log-ratio");
  // log odds of the indicator being on
  const double lo = log_ndtr(z) - (log_l0_over_l1 + log_ndtr(-z));
  if (std::isnan(lo)) throw NumericalError("non-finite indicator log-ratio");
  if (lo >= 0.0) return 1.0 / (1.0 + std::exp(-lo));
  const double e = std::exp(lo);
  return e / (1.0 + e);
}

double residual_ss(const VoxelState& s, const Projection& current, double yy,
                   const DesignPair& design) {
  const double T = static_cast<double>(design.time_points());
  const double b0 = s.beta[0];
  const double b1 = slope_on(s);
  const double cross = b0 * current.p0 + b1 * current.p1;
  const double quad = b0 * b0 * T + 2.0 * b0 * b1 * design.sum_x() + b1 * b1 * design.sum_xx();
  return yy - 2.0 * cross + quad;
}

IgParams tau2_params(std::span<const VoxelState> voxels) {
  double shape = 0.0;
  double ss = 0.0;
  for (const auto& s : voxels) {
    shape += 1.0 + (s.lambda ? 1.0 : 0.0);
    const double b1 = slope_on(s);
    ss += s.beta[0] * s.beta[0] + b1 * b1;
  }
  return {0.5 * shape, 0.5 * ss};
}

IgParams xi2_params(std::span<const VoxelState> voxels) {
  double shape = 0.0;
  double ss = 0.0;
  for (const auto& s : voxels) {
    shape += 1.0 + (s.omega ? 1.0 : 0.0);
    const double g1 = s.omega ? s.gamma[1] : 0.0;
    ss += s.gamma[0] * s.gamma[0] + g1 * g1;
  }
  return {0.5 * shape, 0.5 * ss};
}

void sample_lambda(VoxelState& s, const Projection& current, const VoxelStats& st,
                   const DesignPair& design, const ParcelState& p, const SamplerConfig& cfg,
                   Rng& rng) {
  double lr;
  if (cfg.indicator_update == IndicatorUpdate::Collapsed) {
    lr = log_marginal_magnitude(false, current.p0, current.p1, st.yy, design, s.sigma2, p.tau2) -
         log_marginal_magnitude(true, current.p0, current.p1, st.yy, design, s.sigma2, p.tau2);
  } else {
    VoxelState at = s;
    if (!s.lambda) at.beta[1] = 0.0;
    lr = log_ratio_lambda(at, current.p1, design, p.tau2);
  }
  const double prob = indicator_probability(lr, cfg.psi_lambda + s.eta_lambda);
  s.lambda = rng.uniform() < prob;
  if (!s.lambda) s.beta[1] = 0.0;
}

std::array<double, 2> draw_regression(bool lambda, double p0, double p1, double sigma2,
                                     double tau2, const DesignPair& design, Rng& rng) {
  const double T = static_cast<double>(design.time_points());
  const double r = sigma2 / tau2;
  if (!lambda) {
    const double denom = T + r;
    return {rng.normal(p0 / denom, std::sqrt(sigma2 / denom)), 0.0};
  }
  const double a = T + r;
  const double b = design.sum_x();
  const double d = design.sum_xx() + r;
  const double det = a * d - b * b;
  if (!(det > 0.0)) throw NumericalError("singular magnitude system");
  // (X'X + rI)^-1 = [d -b; -b a] / det
  const double m0 = (d * p0 - b * p1) / det;
  const double m1 = (-b * p0 + a * p1) / det;
  const double c00 = sigma2 * d / det;
  const double c01 = -sigma2 * b / det;
  const double c11 = sigma2 * a / det;
  const double l00 = std::sqrt(c00);
  const double l10 = c01 / l00;
  const double l11 = std::sqrt(std::max(c11 - l10 * l10, 0.0));
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  return {m0 + l00 * z0, m1 + l10 * z0 + l11 * z1};
}

void sample_beta(VoxelState& s, const Projection& current, const DesignPair& design,
                 const ParcelState& p, Rng& rng) {
  s.beta = draw_regression(s.lambda, current.p0, current.p1, s.sigma2, p.tau2, design, rng);
}

void sample_omega(VoxelState& s, Projection& current, const VoxelData& data,
                  const DesignPair& design, const ParcelState& p, const SamplerConfig& cfg,
                  Rng& rng) {
  const Projection at_zero = s.omega ? project(data, design, s.gamma[0], 0.0) : current;
  VoxelState trial = s;
  Projection at_gamma = current;
  double lr;
  if (cfg.indicator_update == IndicatorUpdate::Collapsed) {
    const Gaussian1 q = phase_slope_pseudo_prior(s, data.stats, p.xi2);
    if (!s.omega) {
      trial.gamma[1] = q.mean + std::sqrt(q.var) * rng.normal();
      at_gamma = project(data, design, s.gamma[0], trial.gamma[1]);
    }
    lr = log_ratio_omega(trial, at_gamma, at_zero, p.xi2) +
         log_normal_pdf(trial.gamma[1], q.mean, q.var);
  } else {
    if (!s.omega) trial.gamma[1] = 0.0;
    lr = log_ratio_omega(trial, at_gamma, at_zero, p.xi2);
  }
  const double prob = indicator_probability(lr, cfg.psi_omega + s.eta_omega);
  s.omega = rng.uniform() < prob;
  if (s.omega) {
    s.gamma[1] = trial.gamma[1];
    current = at_gamma;
  } else {
    s.gamma[1] = 0.0;
    current = at_zero;
  }
}

bool sample_gamma_mh(VoxelState& s, Projection& current, const VoxelData& data,
                     const DesignPair& design, const ParcelState& p, const SamplerConfig& cfg,
                     Rng& rng) {
  std::array<double, 2> prop{s.gamma[0] + cfg.mh_step_gamma0 * rng.normal(), 0.0};
  if (s.omega) prop[1] = s.gamma[1] + cfg.mh_step_gamma1 * rng.normal();
  const Projection at_prop = project(data, design, prop[0], prop[1]);
  const double lr = log_mh_ratio(s, current, at_prop, prop, p.xi2);
  require_finite(lr, "MH log-ratio");
  if (std::log(rng.uniform()) < lr) {
    s.gamma = prop;
    current = at_prop;
    return true;
  }
  return false;
}

void sample_sigma2(VoxelState& s, const Projection& current, const VoxelData& data,
                   const DesignPair& design, Rng& rng) {
  double rss = residual_ss(s, current, data.stats.yy, design);
  if (rss <= 1e-10 * data.stats.yy) {
    // Cancellation guard: recompute directly.
    const auto mean = polar_mean({s.beta[0], s.beta[1], s.gamma[0], s.gamma[1]}, s.lambda,
                                 s.omega, design);
    const std::size_t T = design.time_points();
    rss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double dr = data.re[t] - mean[t];
      const double di = data.im[t] - mean[T + t];
      rss += dr * dr + di * di;
    }
  }
  const double shape = static_cast<double>(design.time_points());
  s.sigma2 = std::max(rng.inv_gamma(shape, 0.5 * rss), kSigma2Floor);
}

double sample_tau2(std::span<const VoxelState> voxels, Rng& rng) {
  const auto ig = tau2_params(voxels);
  return rng.inv_gamma(ig.shape, ig.scale);
}

double sample_xi2(std::span<const VoxelState> voxels, Rng& rng) {
  const auto ig = xi2_params(voxels);
  return rng.inv_gamma(ig.shape, ig.scale);
}

VoxelState initialize_voxel(const VoxelData& data, const DesignPair& design) {
  const std::size_t T = design.time_points();
  const auto x = design.x();
  double sm = 0.0;
  double sxm = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double m = std::hypot(data.re[t], data.im[t]);
    sm += m;
    sxm += x[t] * m;
  }
  const double n = static_cast<double>(T);
  const double det = n * design.sum_xx() - design.sum_x() * design.sum_x();
  if (!(det > 0.0)) throw DataError("rank-deficient design");

  VoxelState s;
  s.beta[0] = (design.sum_xx() * sm - design.sum_x() * sxm) / det;
  s.beta[1] = (n * sxm - design.sum_x() * sm) / det;
  const bool zero = data.stats.sum_r == 0.0 && data.stats.sum_i == 0.0;
  s.gamma[0] = zero ? 0.0 : arctan4(data.stats.sum_i, data.stats.sum_r);
  s.gamma[1] = 0.0;
  s.lambda = true;
  s.omega = true;
  const Projection p = project(data, design, s.gamma[0], 0.0);
  const double rss = std::max(residual_ss(s, p, data.stats.yy, design), 0.0);
  s.sigma2 = std::max(rss / (2.0 * n), kSigma2Floor);
  s.eta_lambda = 0.0;
  s.eta_omega = 0.0;
  return s;
}

ParcelState initialize_parcel(const ParcelGraph& graph, const FieldPrior& prior) {
  ParcelState p;
  p.tau2 = 1.0;
  p.xi2 = 1.0;
  p.delta_lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.q));
  p.delta_omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.q));
  p.kappa_lambda = prior.a_kappa * prior.b_kappa;
  p.kappa_omega = prior.a_kappa * prior.b_kappa;
  return p;
}

CvmpChain::CvmpChain(const ComplexImageSeries& data, const DesignPair& design,
                     std::vector<std::size_t> rows, const ParcelGraph& graph,
                     const SamplerConfig& cfg, std::uint64_t stream)
    : design_(design),
      rows_(std::move(rows)),
      graph_(graph),
      cfg_(cfg),
      rng_(cfg.seed, stream, kTagCvmp) {
  if (data.time_points() != design.time_points())
    throw_shape_mismatch("design length", data.time_points(), design.time_points());
  if (static_cast<Eigen::Index>(rows_.size()) != graph.adjacency.rows())
    throw_shape_mismatch("parcel graph", rows_.size(), static_cast<std::size_t>(graph.adjacency.rows()));
  data_.reserve(rows_.size());
  for (std::size_t r : rows_) {
    VoxelData vd{data.real(r), data.imag(r), {}};
    vd.stats = voxel_stats(vd.re, vd.im, design);
    data_.push_back(vd);
  }
  voxels_.reserve(rows_.size());
  for (const auto& vd : data_) voxels_.push_back(initialize_voxel(vd, design));
  parcel_ = initialize_parcel(graph, cfg.field);
  eta_buf_.resize(rows_.size());
  refresh();
}

void CvmpChain::refresh() {
  cache_.resize(voxels_.size());
  for (std::size_t v = 0; v < voxels_.size(); ++v) {
    const auto& s = voxels_[v];
    cache_[v] = project(data_[v], design_, s.gamma[0], s.omega ? s.gamma[1] : 0.0);
  }
}

void CvmpChain::sweep() {
  const bool update_hyper = !cfg_.freeze_hyper;
  for (std::size_t v = 0; v < voxels_.size(); ++v) {
    auto& s = voxels_[v];
    auto& c = cache_[v];
    try {
      sample_lambda(s, c, data_[v].stats, design_, parcel_, cfg_, rng_);
      sample_beta(s, c, design_, parcel_, rng_);
      sample_omega(s, c, data_[v], design_, parcel_, cfg_, rng_);
      accepted_ += sample_gamma_mh(s, c, data_[v], design_, parcel_, cfg_, rng_);
      ++proposed_;
      if (update_hyper) {
        sample_sigma2(s, c, data_[v], design_, rng_);
        s.eta_lambda = sample_eta(s.lambda, graph_.leverage(v), parcel_.kappa_lambda, rng_);
        s.eta_omega = sample_eta(s.omega, graph_.leverage(v), parcel_.kappa_omega, rng_);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("voxel " + std::to_string(rows_[v]) + ": " + e.what());
    }
  }
  if (!update_hyper) return;
  parcel_.tau2 = sample_tau2(voxels_, rng_);
  parcel_.xi2 = sample_xi2(voxels_, rng_);
  const auto n = static_cast<Eigen::Index>(voxels_.size());
  Eigen::VectorXd eta(n);
  for (Eigen::Index v = 0; v < n; ++v) eta_buf_[v] = eta(v) = voxels_[v].eta_lambda;
  parcel_.delta_lambda = sample_delta(eta, graph_, parcel_.kappa_lambda, rng_);
  parcel_.kappa_lambda = sample_kappa(eta_buf_, graph_.leverage, cfg_.field, rng_);
  for (Eigen::Index v = 0; v < n; ++v) eta_buf_[v] = eta(v) = voxels_[v].eta_omega;
  parcel_.delta_omega = sample_delta(eta, graph_, parcel_.kappa_omega, rng_);
  parcel_.kappa_omega = sample_kappa(eta_buf_, graph_.leverage, cfg_.field, rng_);
}

std::size_t PosteriorSummary::unconverged() const {
  return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
}

std::vector<ParcelTask> parcel_tasks(const ComplexImageSeries& data, const Parcellation& parc) {
  if (!(data.dims() == parc.dims)) throw DataError("parcellation grid does not match the data");
  std::vector<ParcelTask> tasks(parc.count());
  for (std::size_t k = 0; k < tasks.size(); ++k) tasks[k].id = k;
  for (std::size_t r = 0; r < data.voxels(); ++r) {
    const std::size_t g = data.grid_index(r);
    auto& t = tasks[parc.parcel_of[g]];
    t.rows.push_back(r);
    t.grid.push_back(g);
  }
  std::erase_if(tasks, [](const ParcelTask& t) { return t.rows.empty(); });
  return tasks;
}

namespace detail {

PosteriorSummary empty_summary(const std::string& model, const ComplexImageSeries& data,
                               const SamplerConfig& cfg, std::size_t parcels) {
  PosteriorSummary out;
  out.model = model;
  out.dims = data.dims();
  out.grid_index.resize(data.voxels());
  for (std::size_t r = 0; r < data.voxels(); ++r) out.grid_index[r] = data.grid_index(r);
  out.threshold = cfg.threshold;
  out.mcse_target = cfg.mcse_target;
  out.n_iter = cfg.n_iter;
  out.burn_in = cfg.burn_in;
  out.parcels = parcels;
  const std::size_t V = data.voxels();
  out.beta0.assign(V, 0.0);
  out.beta1.assign(V, 0.0);
  out.prob_lambda.assign(V, 0.0);
  out.active_mag.assign(V, 0);
  out.active_phase.assign(V, 0);
  out.mcse_lambda.assign(V, 0.0);
  out.converged.assign(V, 0);
  return out;
}

}  // namespace detail

PosteriorSummary run_chain(const ComplexImageSeries& data, const DesignPair& design,
                           const Parcellation& parc, const SamplerConfig& cfg,
                           std::size_t threads) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto tasks = parcel_tasks(data, parc);
  PosteriorSummary out = detail::empty_summary("cvmp", data, cfg, tasks.size());
  const std::size_t V = data.voxels();
  out.gamma0.assign(V, 0.0);
  out.gamma1.assign(V, 0.0);
  out.prob_omega.assign(V, 0.0);
  out.mcse_omega.assign(V, 0.0);

  std::vector<std::uint64_t> accepted(tasks.size(), 0);
  std::vector<std::uint64_t> proposed(tasks.size(), 0);
  const std::size_t keep = cfg.n_iter - cfg.burn_in;

  for_each_parcel(tasks.size(), threads, [&](std::size_t k) {
    const auto& task = tasks[k];
    const ParcelGraph graph =
        build_parcel_graph(data.dims(), task.grid, cfg.basis_size, cfg.neighborhood);
    CvmpChain chain(data, design, task.rows, graph, cfg, task.id);
    const std::size_t n = task.rows.size();
    detail::TraceAccumulator acc(n, keep, 4, true);
    for (std::size_t it = 0; it < cfg.n_iter; ++it) {
      chain.sweep();
      if (it < cfg.burn_in) continue;
      const std::size_t draw = it - cfg.burn_in;
      for (std::size_t v = 0; v < n; ++v) {
        const auto& s = chain.voxels()[v];
        const double vals[4] = {s.beta[0], s.beta[1], s.gamma[0], s.gamma[1]};
        acc.add(v, draw, vals, s.lambda, s.omega);
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t r = task.rows[v];
      out.beta0[r] = acc.mean(v, 0);
      out.beta1[r] = acc.mean(v, 1);
      out.gamma0[r] = wrap_angle(acc.mean(v, 2));
      out.gamma1[r] = acc.mean(v, 3);
      out.prob_lambda[r] = acc.prob1(v);
      out.prob_omega[r] = acc.prob2(v);
      out.active_mag[r] = out.prob_lambda[r] > cfg.threshold;
      out.active_phase[r] = out.prob_omega[r] > cfg.threshold;
      out.mcse_lambda[r] = acc.mcse1(v);
      out.mcse_omega[r] = acc.mcse2(v);
      out.converged[r] =
          out.mcse_lambda[r] < cfg.mcse_target && out.mcse_omega[r] < cfg.mcse_target;
    }
    accepted[k] = chain.mh_accepted();
    proposed[k] = chain.mh_proposed();
  });

  std::uint64_t acc_total = 0;
  std::uint64_t prop_total = 0;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    acc_total += accepted[k];
    prop_total += proposed[k];
  }
  out.mh_acceptance = prop_total ? static_cast<double>(acc_total) / prop_total : 0.0;
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace cvmp
