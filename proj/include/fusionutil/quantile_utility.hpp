#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fusionutil/core.hpp"
#include "fusionutil/dataset.hpp"
#include "fusionutil/nuisance.hpp"

namespace fusionutil {

// Bandwidths for the marginal density of Y and the conditional density of
// Y given X. Unset values use the Silverman rule on the full sample.
struct DensityBandwidths {
  std::optional<double> y;
  std::optional<std::vector<double>> x;
};

struct QuantileAssessmentConfig {
  double nu = 0.5;
  double tau = 0.5;
  std::size_t folds = 5;
  double alpha = 0.95;
  std::uint64_t seed = 0;
  RegressorSpec regressor;  // conditional-CDF regressor
  DensityBandwidths density;
};

struct QuantileIntermediates {
  double mu_hat = 0.0;
  Eigen::VectorXd fhat;  // cross-fitted F(mu_hat | X_i), clamped to [0, 1]
  double theta1_hat = 0.0;
};

struct QuantileVariance {
  double density_term = 0.0;
  double residual_term = 0.0;
  double gamma_sq = 0.0;
  double f_y = 0.0;         // marginal density at mu_hat
  Eigen::VectorXd f_y_x;    // conditional density at (X_i, mu_hat)
};

void validate(const QuantileAssessmentConfig& cfg);

QuantileIntermediates quantile_intermediates(const Dataset& data,
                                             const QuantileAssessmentConfig& cfg);
QuantileIntermediates quantile_intermediates(const Dataset& data,
                                             const QuantileAssessmentConfig& cfg,
                                             const SplitPlan& plan);

double point_estimate_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg);

// mu_tilde is the empirical quantile of the second half; the conditional CDF
// at mu_tilde is cross-fitted on the first ceil(n/2) rows.
double split_estimate_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg);
double split_estimate_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg,
                               const SplitPlan& half_plan);

QuantileVariance variance_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg,
                                   const QuantileIntermediates& im);

UtilityEstimate assess_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg);

}  // namespace fusionutil
