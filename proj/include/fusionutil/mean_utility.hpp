#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>

#include "fusionutil/core.hpp"
#include "fusionutil/dataset.hpp"
#include "fusionutil/nuisance.hpp"

namespace fusionutil {

// How g(X) is modelled: the conditional mean E(Y | X) fitted by a
// nonparametric regressor, or the linear projection fitted by OLS.
enum class MeanMode { ConditionalMean, Linear };

struct MeanAssessmentConfig {
  double nu = 0.5;
  MeanMode g_mode = MeanMode::Linear;
  std::size_t folds = 5;
  double alpha = 0.95;
  std::uint64_t seed = 0;
  RegressorSpec regressor;  // used in ConditionalMean mode only
};

struct MeanIntermediates {
  double mu_hat = 0.0;
  Eigen::VectorXd ghat;
  double theta1_hat = 0.0;
  double theta2_hat = 0.0;
};

// The two summands of the plug-in variance and their sum.
struct MeanVariance {
  double residual_term = 0.0;
  double centered_term = 0.0;
  double gamma_sq = 0.0;
};

// Throws InvalidArgument / OutOfRange / BadFoldCount on an invalid config.
void validate(const MeanAssessmentConfig& cfg);

// The regressor actually used for g: OLS in Linear mode, cfg.regressor otherwise.
RegressorSpec g_regressor(const MeanAssessmentConfig& cfg);

BoundPair estimate_bounds_mean(const Dataset& data, const MeanAssessmentConfig& cfg,
                               const Eigen::VectorXd& ghat);

MeanIntermediates mean_intermediates(const Dataset& data, const MeanAssessmentConfig& cfg);
MeanIntermediates mean_intermediates(const Dataset& data, const MeanAssessmentConfig& cfg,
                                     const SplitPlan& plan);

double point_estimate_mean(const Dataset& data, const MeanAssessmentConfig& cfg);

// Half-sample estimator: g is cross-fitted on the first ceil(n/2) rows and
// the centered sum of squares comes from the remaining rows.
double split_estimate_mean(const Dataset& data, const MeanAssessmentConfig& cfg);
double split_estimate_mean(const Dataset& data, const MeanAssessmentConfig& cfg,
                           const SplitPlan& half_plan);

MeanVariance variance_mean(const Dataset& data, const MeanAssessmentConfig& cfg,
                           const MeanIntermediates& im);

UtilityEstimate assess_mean(const Dataset& data, const MeanAssessmentConfig& cfg);

}  // namespace fusionutil
