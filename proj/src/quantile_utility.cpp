#include "fusionutil/quantile_utility.hpp"

#include <cmath>

#include "fusionutil/stats.hpp"

namespace fusionutil {

namespace {
constexpr double kMinDensity = 1e-12;

Eigen::VectorXd squared_residuals(const Eigen::VectorXd& y, double level,
                                  const Eigen::VectorXd& fhat, std::size_t count) {
  Eigen::VectorXd r2(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < r2.size(); ++i) {
    const double d = (y(i) < level ? 1.0 : 0.0) - fhat(i);
    r2(i) = d * d;
  }
  return r2;
}
}  // namespace

void validate(const QuantileAssessmentConfig& cfg) {
  if (!(cfg.nu >= 0.0 && cfg.nu < 1.0)) throw Error(ErrorCode::OutOfRange, "nu must lie in [0, 1)");
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw Error(ErrorCode::OutOfRange, "tau must lie in (0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "alpha must lie in (0, 1)");
  }
  if (cfg.folds < 2) throw Error(ErrorCode::BadFoldCount, "need at least two folds");
}

QuantileIntermediates quantile_intermediates(const Dataset& data,
                                             const QuantileAssessmentConfig& cfg) {
  validate(cfg);
  return quantile_intermediates(data, cfg, make_split_plan(data.n(), cfg.folds, cfg.seed));
}

QuantileIntermediates quantile_intermediates(const Dataset& data,
                                             const QuantileAssessmentConfig& cfg,
                                             const SplitPlan& plan) {
  validate(cfg);
  QuantileIntermediates im;
  im.mu_hat = empirical_quantile(data.y(), cfg.tau);
  im.fhat = crossfit_predict(data, plan, cfg.regressor, CrossfitTarget::cdf_at(im.mu_hat));
  const double tt = cfg.tau * (1.0 - cfg.tau);
  const Eigen::VectorXd r2 = squared_residuals(data.y(), im.mu_hat, im.fhat, data.n());
  im.theta1_hat = (1.0 - cfg.nu) * stats::mean(r2) + cfg.nu * tt;
  return im;
}

double point_estimate_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg) {
  const auto im = quantile_intermediates(data, cfg);
  return ratio_estimate({im.theta1_hat, cfg.tau * (1.0 - cfg.tau)});
}

double split_estimate_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg) {
  validate(cfg);
  const std::size_t half = (data.n() + 1) / 2;
  return split_estimate_quantile(data, cfg, make_split_plan(half, cfg.folds, cfg.seed));
}

double split_estimate_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg,
                               const SplitPlan& half_plan) {
  validate(cfg);
  const std::size_t n = data.n();
  const std::size_t half = (n + 1) / 2;
  if (n - half < 1) throw Error(ErrorCode::TooFewObservations, "second half-sample is empty");

  const double mu_tilde = empirical_quantile(data.y().tail(static_cast<Eigen::Index>(n - half)), cfg.tau);
  const Dataset first = data.head(half);
  const Eigen::VectorXd fh =
      crossfit_predict(first, half_plan, cfg.regressor, CrossfitTarget::cdf_at(mu_tilde));
  const Eigen::VectorXd r2 = squared_residuals(first.y(), mu_tilde, fh, half);
  const double tt = cfg.tau * (1.0 - cfg.tau);
  return (1.0 - cfg.nu) * stats::mean(r2) / tt + cfg.nu;
}

QuantileVariance variance_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg,
                                   const QuantileIntermediates& im) {
  const auto& y = data.y();
  const auto& x = data.x();
  if (im.fhat.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fhat length differs from n");

  const double hy = cfg.density.y ? *cfg.density.y : silverman_bandwidth(y);
  std::vector<double> hx;
  if (cfg.density.x) {
    hx = *cfg.density.x;
  } else {
    for (Eigen::Index d = 0; d < x.cols(); ++d) hx.push_back(silverman_bandwidth(x.col(d)));
  }

  QuantileVariance v;
  v.f_y = kde_eval(KernelDensity(y, hy), im.mu_hat);
  if (!(v.f_y > kMinDensity)) {
    throw Error(ErrorCode::VanishingDensity, "marginal density estimate vanishes at mu_hat");
  }
  const ConditionalKernelDensity ckd(x, y, hx, hy);
  v.f_y_x.resize(y.size());
  double cross = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    v.f_y_x(i) = cond_kde_eval(ckd, x.row(i), im.mu_hat);
    cross += im.fhat(i) * v.f_y_x(i);
  }
  cross /= static_cast<double>(y.size());

  const double tt = cfg.tau * (1.0 - cfg.tau);
  const double c = 1.0 - cfg.nu;
  const double lead = 2.0 * cross / v.f_y - 1.0;
  const Eigen::VectorXd r2 = squared_residuals(y, im.mu_hat, im.fhat, data.n());
  v.density_term = 2.0 * c * c * lead * lead / tt;
  v.residual_term = 2.0 * c * c * stats::sample_variance(r2) / (tt * tt);
  v.gamma_sq = v.density_term + v.residual_term;
  return v;
}

UtilityEstimate assess_quantile(const Dataset& data, const QuantileAssessmentConfig& cfg) {
  staged("config", [&] { validate(cfg); });

  const double tt = cfg.tau * (1.0 - cfg.tau);
  const auto im = staged("crossfit", [&] { return quantile_intermediates(data, cfg); });
  const double theta_hat = staged("ratio", [&] { return ratio_estimate({im.theta1_hat, tt}); });
  const double theta_tilde = staged("split", [&] { return split_estimate_quantile(data, cfg); });
  const double gamma_sq = variance_or_zero(
      [&] { return staged("variance", [&] { return variance_quantile(data, cfg, im).gamma_sq; }); });

  UtilityEstimate u;
  u.method = Method::Quantile;
  u.nu = cfg.nu;
  u.n = data.n();
  u.alpha = cfg.alpha;
  u.bounds = {im.theta1_hat, tt};
  u.theta_hat_raw = theta_hat;
  u.theta_hat = truncate_point(theta_hat);
  u.theta_tilde_raw = theta_tilde;
  u.gamma_hat = std::sqrt(gamma_sq);
  u.ci_raw = staged("interval", [&] { return wald_interval(theta_tilde, u.gamma_hat, u.n, cfg.alpha); });
  u.ci = truncate_interval(*u.ci_raw);
  return u;
}

}  // namespace fusionutil
