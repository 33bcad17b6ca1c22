#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fusionutil/dataset.hpp"

namespace fusionutil {

// ---------------------------------------------------------------------------
// Cross-fitting partitions

// M-fold partition of {0, ..., n-1}. Built from a seeded Fisher-Yates shuffle
// cut into contiguous blocks; the first n % M folds carry one extra index.
struct SplitPlan {
  std::size_t n = 0;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // fold id in [0, folds) per index

  std::vector<std::size_t> fold(std::size_t m) const;
  std::vector<std::size_t> complement(std::size_t m) const;
  std::vector<std::size_t> fold_sizes() const;
};

SplitPlan make_split_plan(std::size_t n, std::size_t folds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Regressors

// Least squares coefficients; with `intercept` the result is (b0, b1..bp).
// Throws SingularDesign when the Gram matrix has condition number above 1e12.
Eigen::VectorXd ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool intercept);

enum class RegressorKind { OlsLinear, KNearest, LocalLinear };

std::string_view to_string(RegressorKind k) noexcept;
RegressorKind parse_regressor_kind(std::string_view name);

// Unset hyperparameters fall back to rule-of-thumb values computed from the
// training sample: Silverman bandwidth per covariate, k = ceil(n^(4/5) / 4).
struct RegressorSpec {
  RegressorKind kind = RegressorKind::LocalLinear;
  std::optional<std::size_t> neighbors;
  std::optional<std::vector<double>> bandwidths;
};

class Regressor {
 public:
  static Regressor fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const RegressorSpec& spec);

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x0) const;
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& x) const;

  RegressorKind kind() const noexcept { return kind_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
  const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }
  std::size_t neighbors() const noexcept { return neighbors_; }

 private:
  double predict_local_linear(const Eigen::Ref<const Eigen::RowVectorXd>& x0) const;
  double predict_knn(const Eigen::Ref<const Eigen::RowVectorXd>& x0) const;

  RegressorKind kind_ = RegressorKind::OlsLinear;
  Eigen::VectorXd coef_;
  Eigen::MatrixXd train_x_;
  Eigen::VectorXd train_y_;
  std::vector<double> bandwidths_;
  std::size_t neighbors_ = 0;
};

Regressor fit_conditional_mean(const Dataset& train, const RegressorSpec& spec);

struct CrossfitTarget {
  enum class Kind { ConditionalMean, ConditionalCdf };
  Kind kind = Kind::ConditionalMean;
  double level = 0.0;

  static CrossfitTarget conditional_mean() { return {}; }
  // Regress 1(Y < level) on X; predictions are clamped to [0, 1].
  static CrossfitTarget cdf_at(double level) { return {Kind::ConditionalCdf, level}; }
};

// Entry i is predicted by the regressor trained on the complement of i's fold.
Eigen::VectorXd crossfit_predict(const Dataset& data, const SplitPlan& plan,
                                 const RegressorSpec& spec, const CrossfitTarget& target);

// ---------------------------------------------------------------------------
// Quantiles and kernel smoothing

// Order statistic Y_(ceil(n tau)).
double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& y, double tau);

// 1.06 * min(sd, IQR / 1.34) * n^(-1/5); falls back to sd when the IQR is 0.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& sample);

struct KernelDensity {
  Eigen::VectorXd sample;
  double bandwidth;

  KernelDensity(Eigen::VectorXd sample, double bandwidth);
};

// Gaussian-kernel density estimate at `point`.
double kde_eval(const KernelDensity& kd, double point);

// Joint sample for f(y | x): product Gaussian weights in x, Gaussian kernel in y.
struct ConditionalKernelDensity {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<double> x_bandwidths;
  double y_bandwidth;

  ConditionalKernelDensity(Eigen::MatrixXd x, Eigen::VectorXd y,
                           std::vector<double> x_bandwidths, double y_bandwidth);
};

double cond_kde_eval(const ConditionalKernelDensity& kd,
                     const Eigen::Ref<const Eigen::RowVectorXd>& x0, double y0);

}  // namespace fusionutil
