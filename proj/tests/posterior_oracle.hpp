#pragma once

// Exact indicator posteriors for a tiny problem with every hyperparameter held fixed: beta is
// integrated analytically, gamma by a fine grid, and (lambda, omega) enumerated.

#include <array>
#include <cmath>
#include <vector>

#include "cvmp/polar.hpp"
#include "cvmp/random.hpp"
#include "cvmp/sampler.hpp"
#include "cvmp/spatial.hpp"

namespace cvmp::test {

struct OracleProblem {
  GridDims dims{{3, 2}};
  DesignPair design;
  ComplexImageSeries data;
  double sigma2 = 0.04;
  double tau2 = 1.0;
  double xi2 = 1.0;
  double psi = 0.0;
};

inline OracleProblem oracle_problem(std::uint64_t seed) {
  OracleProblem p;
  const std::vector<double> x{0.0, 1.0, 1.0, 0.0, 1.0, 0.0};
  const std::vector<double> u{0.0, 1.0, 0.8, 0.1, 1.0, 0.3};
  p.design = DesignPair(x, u);
  p.psi = ndtri(0.42);
  const double b0 = 1.0, g0 = 0.6;
  const std::array<double, 6> b1{0.0, 0.15, 0.3, 0.0, 0.25, 0.5};
  const std::array<double, 6> g1{0.0, 0.0, 0.3, 0.45, 0.8, 0.2};
  const std::size_t T = x.size();
  Rng rng(seed);
  std::vector<double> re(6 * T), im(6 * T);
  const double sd = std::sqrt(p.sigma2);
  for (std::size_t v = 0; v < 6; ++v)
    for (std::size_t t = 0; t < T; ++t) {
      const double rho = b0 + x[t] * b1[v];
      const double th = g0 + u[t] * g1[v];
      re[v * T + t] = rho * std::cos(th) + sd * rng.normal();
      im[v * T + t] = rho * std::sin(th) + sd * rng.normal();
    }
  p.data = ComplexImageSeries(p.dims, T, re, im);
  return p;
}

// log of the likelihood with beta ~ N(0, tau2 I_k) integrated, D = A_gamma X_lambda built
// explicitly (2T x k), via the determinant lemma and Woodbury on the k x k system.
inline double integrated_loglik(std::span<const double> re, std::span<const double> im,
                                const DesignPair& d, double g0, double g1, bool lambda,
                                double sigma2, double tau2) {
  const std::size_t T = d.time_points();
  double m00 = 0, m01 = 0, m11 = 0, b0 = 0, b1 = 0, yy = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const double th = g0 + d.u()[t] * g1;
    const double c = std::cos(th), s = std::sin(th);
    // columns of D at rows t and T + t: (c, s) and x_t (c, s)
    const double xt = d.x()[t];
    m00 += c * c + s * s;
    m01 += xt * (c * c + s * s);
    m11 += xt * xt * (c * c + s * s);
    b0 += c * re[t] + s * im[t];
    b1 += xt * (c * re[t] + s * im[t]);
    yy += re[t] * re[t] + im[t] * im[t];
  }
  const double r = sigma2 / tau2;
  const double n = 2.0 * static_cast<double>(T);
  const double base = -0.5 * n * std::log(2.0 * kPi * sigma2) - 0.5 * yy / sigma2;
  if (!lambda) {
    const double logdet = std::log(1.0 + m00 / r);
    const double quad = b0 * b0 / (r + m00);
    return base - 0.5 * logdet + 0.5 * quad / sigma2;
  }
  const double a = r + m00, b = m01, e = r + m11;
  const double det = a * e - b * b;
  const double logdet = std::log(det / (r * r));
  const double quad = (e * b0 * b0 - 2.0 * b * b0 * b1 + a * b1 * b1) / det;
  return base - 0.5 * logdet + 0.5 * quad / sigma2;
}

struct OracleProbs {
  double lambda = 0.0;
  double omega = 0.0;
};

inline double logsumexp(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline std::vector<OracleProbs> oracle_posteriors(const OracleProblem& p) {
  const double h0 = 0.01, h1 = 0.01;
  const double lim0 = 2.0 * kPi, lim1 = 5.0;
  const int n0 = static_cast<int>(2.0 * lim0 / h0);
  const int n1 = static_cast<int>(2.0 * lim1 / h1);
  const double log_prior_on = std::log(ndtr(p.psi));
  const double log_prior_off = std::log(ndtr(-p.psi));
  auto lnorm = [](double x, double var) { return -0.5 * std::log(2.0 * kPi * var) - 0.5 * x * x / var; };

  std::vector<OracleProbs> out;
  for (std::size_t v = 0; v < p.data.voxels(); ++v) {
    const auto re = p.data.real(v);
    const auto im = p.data.imag(v);
    double w[2][2];
    for (int lam = 0; lam < 2; ++lam) {
      // omega = 0: one-dimensional integral over g0
      std::vector<double> terms;
      terms.reserve(n0 + 1);
      for (int i = 0; i <= n0; ++i) {
        const double g0 = -lim0 + h0 * i;
        terms.push_back(integrated_loglik(re, im, p.design, g0, 0.0, lam, p.sigma2, p.tau2) +
                        lnorm(g0, p.xi2) + std::log(h0));
      }
      w[lam][0] = logsumexp(terms);
      // omega = 1: two-dimensional integral over (g0, g1)
      terms.clear();
      terms.reserve(static_cast<std::size_t>(n0 + 1) * (n1 + 1));
      for (int i = 0; i <= n0; ++i) {
        const double g0 = -lim0 + h0 * i;
        const double pg0 = lnorm(g0, p.xi2);
        for (int j = 0; j <= n1; ++j) {
          const double g1 = -lim1 + h1 * j;
          terms.push_back(integrated_loglik(re, im, p.design, g0, g1, lam, p.sigma2, p.tau2) + pg0 +
                          lnorm(g1, p.xi2) + std::log(h0 * h1));
        }
      }
      w[lam][1] = logsumexp(terms);
    }
    double lw[2][2];
    for (int l = 0; l < 2; ++l)
      for (int o = 0; o < 2; ++o)
        lw[l][o] = w[l][o] + (l ? log_prior_on : log_prior_off) + (o ? log_prior_on : log_prior_off);
    const double z = logsumexp({lw[0][0], lw[0][1], lw[1][0], lw[1][1]});
    OracleProbs pr;
    pr.lambda = std::exp(lw[1][0] - z) + std::exp(lw[1][1] - z);
    pr.omega = std::exp(lw[0][1] - z) + std::exp(lw[1][1] - z);
    out.push_back(pr);
  }
  return out;
}

// Gibbs estimate with every hyperparameter frozen at the oracle's values.
inline std::vector<OracleProbs> gibbs_posteriors(const OracleProblem& p, IndicatorUpdate mode,
                                                 std::size_t sweeps, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.psi_lambda = cfg.psi_omega = p.psi;
  cfg.freeze_hyper = true;
  cfg.indicator_update = mode;
  cfg.seed = seed;
  cfg.basis_size = 3;
  std::vector<std::size_t> rows(p.data.voxels());
  for (std::size_t v = 0; v < rows.size(); ++v) rows[v] = v;
  const auto graph = build_parcel_graph(p.dims, rows, 3);
  CvmpChain chain(p.data, p.design, rows, graph, cfg, 0);
  for (auto& s : chain.voxels()) {
    s.sigma2 = p.sigma2;
    s.eta_lambda = s.eta_omega = 0.0;
  }
  chain.parcel().tau2 = p.tau2;
  chain.parcel().xi2 = p.xi2;
  chain.refresh();
  const std::size_t burn = sweeps / 10;
  std::vector<OracleProbs> acc(rows.size());
  for (std::size_t it = 0; it < sweeps; ++it) {
    chain.sweep();
    if (it < burn) continue;
    for (std::size_t v = 0; v < rows.size(); ++v) {
      acc[v].lambda += chain.voxels()[v].lambda;
      acc[v].omega += chain.voxels()[v].omega;
    }
  }
  for (auto& a : acc) {
    a.lambda /= static_cast<double>(sweeps - burn);
    a.omega /= static_cast<double>(sweeps - burn);
  }
  return acc;
}

}  // namespace cvmp::test
