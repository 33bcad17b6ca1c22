#include "fusionutil/mean_utility.hpp"

#include <cmath>

#include "fusionutil/stats.hpp"

namespace fusionutil {

void validate(const MeanAssessmentConfig& cfg) {
  if (!(cfg.nu >= 0.0 && cfg.nu < 1.0)) throw Error(ErrorCode::OutOfRange, "nu must lie in [0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "alpha must lie in (0, 1)");
  }
  if (cfg.folds < 2) throw Error(ErrorCode::BadFoldCount, "need at least two folds");
}

RegressorSpec g_regressor(const MeanAssessmentConfig& cfg) {
  if (cfg.g_mode == MeanMode::Linear) return RegressorSpec{RegressorKind::OlsLinear, {}, {}};
  return cfg.regressor;
}

BoundPair estimate_bounds_mean(const Dataset& data, const MeanAssessmentConfig& cfg,
                               const Eigen::VectorXd& ghat) {
  if (static_cast<std::size_t>(ghat.size()) != data.n()) {
    throw Error(ErrorCode::InvalidArgument, "ghat length differs from n");
  }
  const auto& y = data.y();
  const double mu = stats::mean(y);
  const double n = static_cast<double>(data.n());
  double s1 = 0.0;
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = y(i) - ghat(i);
    const double d = y(i) - mu;
    s1 += (1.0 - cfg.nu) * e * e + cfg.nu * d * d;
    s2 += d * d;
  }
  BoundPair bp{s1 / n, s2 / n};
  if (!(bp.theta2_hat > 0.0)) {
    throw Error(ErrorCode::DegenerateDenominator, "response is constant");
  }
  return bp;
}

MeanIntermediates mean_intermediates(const Dataset& data, const MeanAssessmentConfig& cfg) {
  validate(cfg);
  return mean_intermediates(data, cfg, make_split_plan(data.n(), cfg.folds, cfg.seed));
}

MeanIntermediates mean_intermediates(const Dataset& data, const MeanAssessmentConfig& cfg,
                                     const SplitPlan& plan) {
  validate(cfg);
  MeanIntermediates im;
  im.mu_hat = stats::mean(data.y());
  im.ghat = crossfit_predict(data, plan, g_regressor(cfg), CrossfitTarget::conditional_mean());
  const BoundPair bp = estimate_bounds_mean(data, cfg, im.ghat);
  im.theta1_hat = bp.theta1_hat;
  im.theta2_hat = bp.theta2_hat;
  return im;
}

double point_estimate_mean(const Dataset& data, const MeanAssessmentConfig& cfg) {
  const auto im = mean_intermediates(data, cfg);
  return ratio_estimate({im.theta1_hat, im.theta2_hat});
}

double split_estimate_mean(const Dataset& data, const MeanAssessmentConfig& cfg) {
  validate(cfg);
  const std::size_t half = (data.n() + 1) / 2;
  return split_estimate_mean(data, cfg, make_split_plan(half, cfg.folds, cfg.seed));
}

double split_estimate_mean(const Dataset& data, const MeanAssessmentConfig& cfg,
                           const SplitPlan& half_plan) {
  validate(cfg);
  const std::size_t n = data.n();
  const std::size_t half = (n + 1) / 2;
  if (n - half < 1) throw Error(ErrorCode::TooFewObservations, "second half-sample is empty");

  const Dataset first = data.head(half);
  const Eigen::VectorXd gh =
      crossfit_predict(first, half_plan, g_regressor(cfg), CrossfitTarget::conditional_mean());
  const double mu = stats::mean(data.y());

  double num = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    num += (data.y()(k) - gh(k)) * (data.y()(k) - gh(k));
  }
  double den = 0.0;
  for (std::size_t i = half; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    den += (data.y()(k) - mu) * (data.y()(k) - mu);
  }
  num /= static_cast<double>(half);
  den /= static_cast<double>(n - half);
  if (!(den > 0.0)) {
    throw Error(ErrorCode::DegenerateDenominator, "second half-sample response is constant");
  }
  return (1.0 - cfg.nu) * num / den + cfg.nu;
}

MeanVariance variance_mean(const Dataset& data, const MeanAssessmentConfig& cfg,
                           const MeanIntermediates& im) {
  const auto& y = data.y();
  if (im.ghat.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "ghat length differs from n");
  if (!(im.theta2_hat > 0.0)) throw Error(ErrorCode::DegenerateDenominator, "theta2_hat is not positive");

  const Eigen::VectorXd e2 = (y - im.ghat).array().square();
  const Eigen::VectorXd d2 = (y.array() - im.mu_hat).square();
  const double ve = stats::sample_variance(e2);
  const double vd = stats::sample_variance(d2);
  if (stats::is_degenerate(e2, ve) && stats::is_degenerate(d2, vd)) {
    throw Error(ErrorCode::DegenerateVariance, "squared residuals are constant");
  }

  const double t1 = im.theta1_hat;
  const double t2 = im.theta2_hat;
  const double c = 1.0 - cfg.nu;
  const double excess = t1 - cfg.nu * t2;
  MeanVariance v;
  v.residual_term = 2.0 * c * c * ve / (t2 * t2);
  v.centered_term = 2.0 * excess * excess * vd / (t2 * t2 * t2 * t2);
  v.gamma_sq = v.residual_term + v.centered_term;
  return v;
}

UtilityEstimate assess_mean(const Dataset& data, const MeanAssessmentConfig& cfg) {
  staged("config", [&] { validate(cfg); });

  const auto im = staged("crossfit", [&] { return mean_intermediates(data, cfg); });
  const double theta_hat = staged("ratio", [&] { return ratio_estimate({im.theta1_hat, im.theta2_hat}); });
  const double theta_tilde = staged("split", [&] { return split_estimate_mean(data, cfg); });
  const double gamma_sq = variance_or_zero(
      [&] { return staged("variance", [&] { return variance_mean(data, cfg, im).gamma_sq; }); });

  UtilityEstimate u;
  u.method = cfg.g_mode == MeanMode::Linear ? Method::MeanLinear : Method::MeanConditional;
  u.nu = cfg.nu;
  u.n = data.n();
  u.alpha = cfg.alpha;
  u.bounds = {im.theta1_hat, im.theta2_hat};
  u.theta_hat_raw = theta_hat;
  u.theta_hat = truncate_point(theta_hat);
  u.theta_tilde_raw = theta_tilde;
  u.gamma_hat = std::sqrt(gamma_sq);
  u.ci_raw = staged("interval", [&] { return wald_interval(theta_tilde, u.gamma_hat, u.n, cfg.alpha); });
  u.ci = truncate_interval(*u.ci_raw);
  return u;
}

}  // namespace fusionutil
