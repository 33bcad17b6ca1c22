#pragma once

#include <Eigen/Dense>

namespace fusionutil::stats {

double mean(const Eigen::Ref<const Eigen::VectorXd>& v);

// Divisor n - 1; requires at least two values.
double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& v);

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double interpolated_quantile(const Eigen::Ref<const Eigen::VectorXd>& v, double p);

// True when the sample variance is zero up to rounding of the values.
bool is_degenerate(const Eigen::Ref<const Eigen::VectorXd>& v, double variance);

}  // namespace fusionutil::stats
