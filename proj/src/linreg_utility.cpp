#include "fusionutil/linreg_utility.hpp"

#include <cmath>
#include <limits>

#include "fusionutil/stats.hpp"

namespace fusionutil {

namespace {
constexpr double kMaxCondition = 1e12;

void check_nu(double nu) {
  if (!(nu >= 0.0 && nu < 1.0)) throw Error(ErrorCode::OutOfRange, "nu must lie in [0, 1)");
}

void check_positive(const LinRegComponents& comp) {
  if (!(comp.alpha_hat > 0.0)) {
    throw Error(ErrorCode::DegenerateResidualVariance, "alpha_hat is zero (exact fit)");
  }
  if (!(comp.kappa_hat > 0.0)) throw Error(ErrorCode::SingularDesign, "kappa_hat is not positive");
}
}  // namespace

LinRegComponents fit_components(const Dataset& data, std::size_t s_index) {
  if (s_index >= data.p()) throw Error(ErrorCode::OutOfRange, "s_index is out of range");
  const auto& x = data.x();
  const auto& y = data.y();
  const double n = static_cast<double>(data.n());
  const auto s = x.col(static_cast<Eigen::Index>(s_index));

  LinRegComponents c;
  c.s_index = s_index;
  const double ss = s.squaredNorm();
  if (!(ss > 0.0)) throw Error(ErrorCode::ZeroSColumn, "designated S column is identically zero");

  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > kMaxCondition) {
    throw Error(ErrorCode::SingularDesign, "covariate Gram matrix is numerically singular");
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  c.mu_hat = ldlt.solve(x.transpose() * y);
  c.eta_hat = s.dot(y) / ss;
  c.Sigma_hat = gram / n;
  c.Sigma_inv = c.Sigma_hat.ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  c.kappa_hat = c.Sigma_inv.trace();
  const Eigen::VectorXd resid = y - x * c.mu_hat;
  c.sigma_hat = std::sqrt(resid.squaredNorm() / n);
  const Eigen::ArrayXd r = (y - c.eta_hat * s).array();
  c.alpha_hat = (s.array().square() * r.square()).sum() / n;
  return c;
}

BoundPair linreg_bounds(const LinRegComponents& comp, double nu) {
  check_nu(nu);
  check_positive(comp);
  const double s2 = comp.sigma_hat * comp.sigma_hat;
  return {s2 * comp.kappa_hat - (1.0 - nu) * s2 * s2 / comp.alpha_hat, s2 * comp.kappa_hat};
}

double point_estimate_linreg(const LinRegComponents& comp, double nu) {
  check_nu(nu);
  check_positive(comp);
  const double s2 = comp.sigma_hat * comp.sigma_hat;
  return 1.0 - (1.0 - nu) * s2 / (comp.alpha_hat * comp.kappa_hat);
}

Eigen::VectorXd linreg_composite(const Dataset& data, const LinRegComponents& comp) {
  check_positive(comp);
  const auto& x = data.x();
  const auto& y = data.y();
  const auto s = x.col(static_cast<Eigen::Index>(comp.s_index));
  const double s2 = comp.sigma_hat * comp.sigma_hat;

  const Eigen::ArrayXd r = (y - comp.eta_hat * s).array();
  const double e_s3r = (s.array().cube() * r).mean();
  const double e_s2 = s.array().square().mean();
  // Tr(Sigma^-1 x x' Sigma^-1) = |Sigma^-1 x|^2
  const Eigen::VectorXd quad = (x * comp.Sigma_inv).rowwise().squaredNorm();
  const Eigen::ArrayXd eps = (y - x * comp.mu_hat).array();

  const Eigen::ArrayXd sa = s.array();
  return eps.square() + (s2 / comp.kappa_hat) * quad.array() -
         (s2 / comp.alpha_hat) * (sa.square() * r.square() - 2.0 * e_s3r * sa * r / e_s2);
}

double variance_linreg(const Dataset& data, const LinRegComponents& comp, double nu) {
  check_nu(nu);
  const Eigen::VectorXd c = linreg_composite(data, comp);
  const double v = stats::sample_variance(c);
  if (stats::is_degenerate(c, v)) {
    throw Error(ErrorCode::DegenerateVariance, "influence composite is constant");
  }
  const double k = (1.0 - nu) / (comp.alpha_hat * comp.kappa_hat);
  return k * k * v;
}

Eigen::VectorXd linreg_influence_values(const Dataset& data, const LinRegComponents& comp,
                                        double nu) {
  const BoundPair bp = linreg_bounds(comp, nu);
  const auto& x = data.x();
  const auto& y = data.y();
  const auto s = x.col(static_cast<Eigen::Index>(comp.s_index));
  const double s2 = comp.sigma_hat * comp.sigma_hat;
  const double kappa = comp.kappa_hat;
  const double alpha = comp.alpha_hat;

  const Eigen::ArrayXd r = (y - comp.eta_hat * s).array();
  const Eigen::ArrayXd sa = s.array();
  const double e_s3r = (sa.cube() * r).mean();
  const double e_s2 = sa.square().mean();

  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const Eigen::VectorXd v = comp.Sigma_inv * x.row(i).transpose();
    const double tr = v.squaredNorm();
    const double eps = y(i) - x.row(i).dot(comp.mu_hat);
    const double e2 = eps * eps;
    const double b = sa(i) * sa(i) * r(i) * r(i) - 2.0 * e_s3r * sa(i) * r(i) / e_s2;
    const double d2 = kappa * e2 - s2 * (tr - kappa) - bp.theta2_hat;
    const double d1 = kappa * e2 - s2 * (tr - kappa) - 2.0 * (1.0 - nu) * (s2 / alpha) * e2 +
                      (1.0 - nu) * (s2 * s2 / (alpha * alpha)) * b - bp.theta1_hat;
    out(i) = d1 / bp.theta2_hat - bp.theta1_hat * d2 / (bp.theta2_hat * bp.theta2_hat);
  }
  return out;
}

UtilityEstimate assess_linreg(const Dataset& data, std::size_t s_index, double nu, double alpha) {
  staged("config", [&] {
    check_nu(nu);
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::OutOfRange, "alpha must lie in (0, 1)");
  });
  const auto comp = staged("components", [&] { return fit_components(data, s_index); });
  const auto bp = staged("ratio", [&] { return linreg_bounds(comp, nu); });
  const double theta_hat = staged("ratio", [&] { return point_estimate_linreg(comp, nu); });
  const double gamma_sq =
      variance_or_zero([&] { return staged("variance", [&] { return variance_linreg(data, comp, nu); }); });

  UtilityEstimate u;
  u.method = Method::LinReg;
  u.nu = nu;
  u.n = data.n();
  u.alpha = alpha;
  u.bounds = bp;
  u.theta_hat_raw = theta_hat;
  u.theta_hat = truncate_point(theta_hat);
  u.gamma_hat = std::sqrt(gamma_sq);
  u.ci_raw = staged("interval", [&] { return wald_interval(theta_hat, u.gamma_hat, u.n, alpha); });
  u.ci = truncate_interval(*u.ci_raw);
  return u;
}

}  // namespace fusionutil
