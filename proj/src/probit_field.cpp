#include "cvmp/probit_field.hpp"

#include <cmath>

#include "cvmp/error.hpp"

namespace cvmp {

double sample_eta(bool indicator, double leverage, double kappa, Rng& rng) {
  if (!(kappa > 0.0)) throw NumericalError("kappa must be positive");
  return rng.half_normal(std::sqrt((1.0 + leverage) / kappa), indicator);
}

Eigen::VectorXd sample_delta(const Eigen::VectorXd& eta, const ParcelGraph& graph, double kappa,
                             Rng& rng) {
  if (!(kappa > 0.0)) throw NumericalError("kappa must be positive");
  const Eigen::VectorXd mean = graph.delta_cov * (graph.basis.transpose() * eta) / kappa;
  Eigen::VectorXd z(graph.q);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + graph.delta_cov_chol * z / std::sqrt(kappa);
}

KappaParams kappa_params(std::span<const double> eta, const Eigen::VectorXd& leverage,
                         const FieldPrior& prior) {
  if (static_cast<Eigen::Index>(eta.size()) != leverage.size())
    throw_shape_mismatch("eta", static_cast<std::size_t>(leverage.size()), eta.size());
  double s = 0.0;
  for (std::size_t v = 0; v < eta.size(); ++v) s += eta[v] * eta[v] / (1.0 + leverage(v));
  return {prior.a_kappa + 0.5 * static_cast<double>(eta.size()),
          1.0 / (0.5 * s + 1.0 / prior.b_kappa)};
}

double sample_kappa(std::span<const double> eta, const Eigen::VectorXd& leverage,
                    const FieldPrior& prior, Rng& rng) {
  const auto p = kappa_params(eta, leverage, prior);
  return rng.gamma(p.shape, p.scale);
}

}  // namespace cvmp
