#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "fusionutil/core.hpp"
#include "fusionutil/dataset.hpp"

namespace fusionutil {

// Plug-in components for the regression of Y on centered covariates X with
// S = X[:, s_index] the covariate of the external univariate fit.
struct LinRegComponents {
  Eigen::VectorXd mu_hat;     // OLS of Y on X, no intercept
  double eta_hat = 0.0;       // sum(S Y) / sum(S^2)
  Eigen::MatrixXd Sigma_hat;  // X'X / n
  Eigen::MatrixXd Sigma_inv;
  double kappa_hat = 0.0;     // trace of Sigma_inv
  double sigma_hat = 0.0;     // root mean squared residual
  double alpha_hat = 0.0;     // mean of S^2 (Y - eta_hat S)^2
  std::size_t s_index = 0;
};

LinRegComponents fit_components(const Dataset& data, std::size_t s_index);

BoundPair linreg_bounds(const LinRegComponents& comp, double nu);

// 1 - (1 - nu) sigma^2 / (alpha kappa)
double point_estimate_linreg(const LinRegComponents& comp, double nu);

// Per-observation composite whose sample variance, scaled by
// ((1 - nu) / (alpha kappa))^2, is the plug-in asymptotic variance.
Eigen::VectorXd linreg_composite(const Dataset& data, const LinRegComponents& comp);

double variance_linreg(const Dataset& data, const LinRegComponents& comp, double nu);

// Plug-in efficient influence values of theta built from the influence
// functions of the two traces (diagnostic; its sample variance should equal
// variance_linreg).
Eigen::VectorXd linreg_influence_values(const Dataset& data, const LinRegComponents& comp,
                                        double nu);

UtilityEstimate assess_linreg(const Dataset& data, std::size_t s_index, double nu,
                              double alpha = 0.95);

}  // namespace fusionutil
