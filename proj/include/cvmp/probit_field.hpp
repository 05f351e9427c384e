#pragma once

// Conditionals of the probit spatial field: auxiliaries eta, random effects delta, precision kappa.

#include <span>

#include <Eigen/Dense>

#include "cvmp/random.hpp"
#include "cvmp/spatial.hpp"

namespace cvmp {

struct FieldPrior {
  double a_kappa = 0.5;
  double b_kappa = 2000.0;  // scale
};

// Half-line normal with variance (1 + leverage) / kappa; positive side when indicator is set.
double sample_eta(bool indicator, double leverage, double kappa, Rng& rng);

// N((1/kappa) P M' eta, (1/kappa) P) with P = (Q_s + M'M)^-1.
Eigen::VectorXd sample_delta(const Eigen::VectorXd& eta, const ParcelGraph& graph, double kappa,
                             Rng& rng);

// Gamma(a + V/2, [sum eta^2 / (1 + c_v) / 2 + 1/b]^-1), scale parameterisation.
double sample_kappa(std::span<const double> eta, const Eigen::VectorXd& leverage,
                    const FieldPrior& prior, Rng& rng);

struct KappaParams {
  double shape;
  double scale;
};
KappaParams kappa_params(std::span<const double> eta, const Eigen::VectorXd& leverage,
                         const FieldPrior& prior);

}  // namespace cvmp
