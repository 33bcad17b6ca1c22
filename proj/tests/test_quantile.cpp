#include <gtest/gtest.h>

#include <cmath>

#include "fusionutil/quantile_utility.hpp"
#include "fusionutil/simulation.hpp"

using namespace fusionutil;

namespace {

Dataset dgp(double b, std::size_t n, std::uint64_t seed) {
  return generate_dgp(DgpConfig{b, 0.2, n, 0.5, seed});
}

QuantileAssessmentConfig config(double nu, double tau, std::uint64_t seed = 1) {
  QuantileAssessmentConfig cfg;
  cfg.nu = nu;
  cfg.tau = tau;
  cfg.seed = seed;
  return cfg;
}

// Two well-separated clusters with x = y: 1-NN always predicts the indicator
// of the query's own cluster, so the cross-fitted CDF equals 1(Y < mu_hat).
Dataset two_clusters(std::size_t low, std::size_t high) {
  const std::size_t n = low + high;
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    y(static_cast<Eigen::Index>(i)) = i < low ? 0.01 * static_cast<double>(i)
                                              : 10.0 + 0.01 * static_cast<double>(i);
  }
  return Dataset(y, Eigen::MatrixXd(y));
}

QuantileAssessmentConfig one_nn(double nu, double tau) {
  auto cfg = config(nu, tau);
  cfg.regressor = RegressorSpec{RegressorKind::KNearest, 1, {}};
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Point and split estimates

TEST(QuantilePoint, PerfectClassifierGivesNu) {
  const Dataset d = two_clusters(9, 31);
  const auto cfg = one_nn(0.5, 0.25);
  const auto im = quantile_intermediates(d, cfg);
  EXPECT_DOUBLE_EQ(im.mu_hat, 10.0 + 0.09);
  for (Eigen::Index i = 0; i < 40; ++i) EXPECT_EQ(im.fhat(i), i < 9 ? 1.0 : 0.0);
  EXPECT_DOUBLE_EQ(point_estimate_quantile(d, cfg), 0.5);

  const auto u = assess_quantile(d, cfg);
  EXPECT_DOUBLE_EQ(u.theta_hat, 0.5);
  EXPECT_EQ(u.method, Method::Quantile);
}

TEST(QuantilePoint, NoInformationGivesOne) {
  // Constant covariate: every fold-complement CDF estimate is close to tau.
  const std::size_t n = 400;
  const Eigen::VectorXd y = dgp(0.0, n, 3).y();
  const Dataset d(y, Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), 1, 1.0));
  auto cfg = config(0.5, 0.5, 3);
  cfg.regressor = RegressorSpec{RegressorKind::KNearest, n, {}};
  EXPECT_NEAR(point_estimate_quantile(d, cfg), 1.0, 0.02);
}

TEST(QuantilePoint, LowerBoundAndCeiling) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    for (double tau : {0.1, 0.25, 0.5, 0.9}) {
      const Dataset d = dgp(0.5 * static_cast<double>(s % 3), 80 + 10 * s, s);
      auto cfg = config(0.3, tau, s);
      if (s % 2 == 1) cfg.regressor = RegressorSpec{RegressorKind::KNearest, {}, {}};
      const double t = point_estimate_quantile(d, cfg);
      EXPECT_GE(t, 0.3);
      EXPECT_LE(t, 0.7 / (tau * (1.0 - tau)) + 0.3 + 1e-12);
      EXPECT_GE(split_estimate_quantile(d, cfg), 0.3);
    }
  }
}

TEST(QuantilePoint, AffineInNu) {
  const Dataset d = dgp(1.0, 300, 4);
  auto cfg = config(0.0, 0.25, 4);
  const double t0 = point_estimate_quantile(d, cfg);
  cfg.nu = 0.25;
  const double t1 = point_estimate_quantile(d, cfg);
  cfg.nu = 0.5;
  const double t2 = point_estimate_quantile(d, cfg);
  EXPECT_NEAR(t1, 0.75 * t0 + 0.25, 1e-12);
  EXPECT_NEAR(t2, 0.5 * t0 + 0.5, 1e-12);
}

TEST(QuantilePoint, InvariantUnderMonotoneTransformWithNearestNeighbours) {
  const Dataset d = dgp(1.0, 300, 5);
  auto cfg = config(0.5, 0.3, 5);
  cfg.regressor = RegressorSpec{RegressorKind::KNearest, {}, {}};
  const Dataset t(d.y().array().exp().matrix(), d.x());
  const Dataset c((d.y().array().cube() + 2.0).matrix(), d.x());
  EXPECT_EQ(point_estimate_quantile(t, cfg), point_estimate_quantile(d, cfg));
  EXPECT_EQ(point_estimate_quantile(c, cfg), point_estimate_quantile(d, cfg));
  EXPECT_EQ(split_estimate_quantile(t, cfg), split_estimate_quantile(d, cfg));
}

TEST(QuantilePoint, QuantileConditionHolds) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dataset d = dgp(1.0, 50 + s, s);
    for (double tau : {0.1, 0.33, 0.5, 0.75}) {
      const auto im = quantile_intermediates(d, config(0.5, tau, s));
      const double below = (d.y().array() < im.mu_hat).cast<double>().mean();
      EXPECT_LE(std::abs(below - tau), 1.0 / static_cast<double>(d.n()) + 1e-15);
      EXPECT_GE(im.fhat.minCoeff(), 0.0);
      EXPECT_LE(im.fhat.maxCoeff(), 1.0);
    }
  }
}

TEST(QuantileSplit, PerfectClassifierOnFirstHalf) {
  // Both halves hold the two clusters; the second half fixes mu_tilde
  // between them.
  Eigen::VectorXd y(80);
  for (Eigen::Index i = 0; i < 80; ++i) {
    const bool low = (i % 40) < 10;
    y(i) = (low ? 0.0 : 10.0) + 0.001 * static_cast<double>(i);
  }
  const Dataset d(y, Eigen::MatrixXd(y));
  const auto cfg = one_nn(0.4, 0.25);
  EXPECT_DOUBLE_EQ(split_estimate_quantile(d, cfg), 0.4);
}

// ---------------------------------------------------------------------------
// Variance

TEST(QuantileVariance, SummandsAddUp) {
  const Dataset d = dgp(0.5, 400, 6);
  const auto cfg = config(0.5, 0.25, 6);
  const auto v = variance_quantile(d, cfg, quantile_intermediates(d, cfg));
  EXPECT_GE(v.density_term, 0.0);
  EXPECT_GE(v.residual_term, 0.0);
  EXPECT_NEAR(v.density_term + v.residual_term, v.gamma_sq, 1e-12 * v.gamma_sq);
  EXPECT_GT(v.f_y, 0.0);
  EXPECT_GE(v.f_y_x.minCoeff(), 0.0);
}

TEST(QuantileVariance, ResidualTermZeroForPerfectClassifier) {
  const Dataset d = two_clusters(9, 31);
  const auto cfg = one_nn(0.5, 0.25);
  const auto v = variance_quantile(d, cfg, quantile_intermediates(d, cfg));
  EXPECT_EQ(v.residual_term, 0.0);
}

TEST(QuantileVariance, VanishingDensity) {
  const Dataset d = dgp(0.5, 200, 7);
  auto cfg = config(0.5, 0.5, 7);
  cfg.density.y = 1e14;
  try {
    variance_quantile(d, cfg, quantile_intermediates(d, cfg));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VanishingDensity);
  }
  try {
    assess_quantile(d, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VanishingDensity);
    EXPECT_EQ(e.stage(), "variance");
  }
}

TEST(QuantileVariance, VanishesAsNuApproachesOne) {
  const Dataset d = dgp(0.5, 300, 8);
  double prev = 0.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto cfg = config(1.0 - eps, 0.5, 8);
    const double g = variance_quantile(d, cfg, quantile_intermediates(d, cfg)).gamma_sq;
    if (prev > 0.0) EXPECT_NEAR(g / prev, 0.01, 1e-9);
    prev = g;
  }
}

// ---------------------------------------------------------------------------
// Assessment

TEST(QuantileAssess, IntervalCenteredOnSplitEstimate) {
  const Dataset d = dgp(1.0, 500, 9);
  const auto cfg = config(0.5, 0.25, 9);
  const auto u = assess_quantile(d, cfg);
  EXPECT_DOUBLE_EQ(*u.theta_tilde_raw, split_estimate_quantile(d, cfg));
  EXPECT_NEAR(0.5 * (u.ci_raw->lo + u.ci_raw->hi), *u.theta_tilde_raw, 1e-12);
  EXPECT_DOUBLE_EQ(u.bounds.theta2_hat, 0.25 * 0.75);
}

TEST(QuantileAssess, BadTau) {
  for (double tau : {0.0, 1.0, 1.5}) {
    try {
      assess_quantile(dgp(0.5, 100, 1), config(0.5, tau));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
      EXPECT_EQ(e.stage(), "config");
    }
  }
}
