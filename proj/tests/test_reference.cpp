#include <gtest/gtest.h>

#include "fixture_data.hpp"
#include "fusionutil/linreg_utility.hpp"
#include "fusionutil/mean_utility.hpp"
#include "fusionutil/quantile_utility.hpp"
#include "fusionutil/simulation.hpp"

using namespace fusionutil;

namespace {

constexpr double kTol = 1e-8;

Dataset dataset_for(const nlohmann::json& e) {
  DgpConfig cfg;
  cfg.b = e["b"];
  cfg.rho = e.value("rho", 0.2);
  cfg.n = e["n"];
  cfg.seed = e["seed"];
  return generate_dgp(cfg);
}

void expect_digest(const Dataset& d, const nlohmann::json& dig) {
  EXPECT_NEAR(d.y().sum(), dig["y_sum"].get<double>(), 1e-10);
  EXPECT_NEAR(d.x().sum(), dig["x_sum"].get<double>(), 1e-10);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(d.y()(i), dig["y_head"][i].get<double>());
  EXPECT_DOUBLE_EQ(d.x()(0, 0), dig["x_head"][0].get<double>());
  EXPECT_DOUBLE_EQ(d.x()(0, 1), dig["x_head"][1].get<double>());
}

void expect_close(double got, const nlohmann::json& want, const std::string& what) {
  EXPECT_TRUE(close_to(got, want.get<double>(), kTol))
      << what << ": got " << got << " want " << want.get<double>();
}

void check_mean(const Dataset& d, const nlohmann::json& e, const nlohmann::json& ref,
                MeanMode mode, RegressorKind kind) {
  MeanAssessmentConfig cfg;
  cfg.nu = e["nu"];
  cfg.g_mode = mode;
  cfg.folds = e.value("folds", 5);
  cfg.seed = e["seed"];
  cfg.regressor.kind = kind;
  const auto im = mean_intermediates(d, cfg);
  expect_close(im.theta1_hat, ref["theta1"], "theta1");
  expect_close(im.theta2_hat, ref["theta2"], "theta2");
  expect_close(point_estimate_mean(d, cfg), ref["theta_hat"], "theta_hat");
  expect_close(split_estimate_mean(d, cfg), ref["theta_tilde"], "theta_tilde");
  expect_close(variance_mean(d, cfg, im).gamma_sq, ref["gamma_sq"], "gamma_sq");
}

void check_quantile(const Dataset& d, const nlohmann::json& e, const nlohmann::json& ref) {
  QuantileAssessmentConfig cfg;
  cfg.nu = e["nu"];
  cfg.tau = e["tau"];
  cfg.folds = e.value("folds", 5);
  cfg.seed = e["seed"];
  const auto im = quantile_intermediates(d, cfg);
  expect_close(im.mu_hat, ref["mu_hat"], "mu_hat");
  expect_close(im.theta1_hat, ref["theta1"], "theta1");
  expect_close(point_estimate_quantile(d, cfg), ref["theta_hat"], "theta_hat");
  expect_close(split_estimate_quantile(d, cfg), ref["theta_tilde"], "theta_tilde");
  const auto v = variance_quantile(d, cfg, im);
  expect_close(v.f_y, ref["f_y"], "f_y");
  expect_close(v.density_term, ref["gamma_sq_first"], "gamma_sq_first");
  expect_close(v.residual_term, ref["gamma_sq_second"], "gamma_sq_second");
  expect_close(v.gamma_sq, ref["gamma_sq"], "gamma_sq");
}

void check_linreg(const Dataset& d, const nlohmann::json& e, const nlohmann::json& ref) {
  const double nu = e["nu"];
  const auto c = fit_components(d, 0);
  for (int k = 0; k < 2; ++k) expect_close(c.mu_hat(k), ref["mu_hat"][k], "mu_hat");
  expect_close(c.eta_hat, ref["eta_hat"], "eta_hat");
  expect_close(c.kappa_hat, ref["kappa_hat"], "kappa_hat");
  expect_close(c.sigma_hat, ref["sigma_hat"], "sigma_hat");
  expect_close(c.alpha_hat, ref["alpha_hat"], "alpha_hat");
  expect_close(point_estimate_linreg(c, nu), ref["theta_hat"], "theta_hat");
  expect_close(variance_linreg(d, c, nu), ref["gamma_sq"], "gamma_sq");
}

}  // namespace

class ReferenceDataset : public ::testing::TestWithParam<int> {};

TEST_P(ReferenceDataset, MatchesBruteForceReference) {
  const auto& e = reference_values()["datasets"][GetParam()];
  const Dataset d = dataset_for(e);
  expect_digest(d, e["digest"]);
  {
    SCOPED_TRACE("mean linear");
    check_mean(d, e, e["mean_linear"], MeanMode::Linear, RegressorKind::OlsLinear);
  }
  {
    SCOPED_TRACE("mean conditional");
    check_mean(d, e, e["mean_conditional"], MeanMode::ConditionalMean, RegressorKind::LocalLinear);
  }
  if (e.contains("mean_knn")) {
    SCOPED_TRACE("mean k-nn");
    check_mean(d, e, e["mean_knn"], MeanMode::ConditionalMean, RegressorKind::KNearest);
  }
  {
    SCOPED_TRACE("quantile");
    check_quantile(d, e, e["quantile"]);
  }
  {
    SCOPED_TRACE("linreg");
    check_linreg(d, e, e["linreg"]);
  }
}

INSTANTIATE_TEST_SUITE_P(TwentySeeds, ReferenceDataset, ::testing::Range(0, 20));

TEST(ReferenceCrossfit, LocalLinearPredictionsMatch) {
  const auto& c = reference_values()["crossfit"];
  const Dataset d = dataset_for(c);
  expect_digest(d, c["digest"]);
  const auto plan = make_split_plan(d.n(), c["folds"], c["seed"]);
  for (std::size_t i = 0; i < d.n(); ++i) ASSERT_EQ(plan.assignment[i], c["assignment"][i].get<std::size_t>());
  const auto pred = crossfit_predict(d, plan, RegressorSpec{}, CrossfitTarget::conditional_mean());
  for (std::size_t i = 0; i < d.n(); ++i) {
    ASSERT_TRUE(close_to(pred(static_cast<Eigen::Index>(i)), c["local_linear"][i].get<double>(), kTol))
        << "row " << i;
  }
}

TEST(ReferenceExamples, PointMeanLinear) {
  const auto& e = reference_values()["examples"]["point_mean_linear_b05_n2000_s11"];
  const Dataset d = dataset_for(e);
  expect_digest(d, e["digest"]);
  check_mean(d, e, e, MeanMode::Linear, RegressorKind::OlsLinear);
  MeanAssessmentConfig cfg;
  cfg.seed = 11;
  EXPECT_NEAR(point_estimate_mean(d, cfg), 0.8125, 0.05);
}

TEST(ReferenceExamples, SplitMeanLinear) {
  const auto& e = reference_values()["examples"]["split_mean_linear_b1_n1000_s3"];
  const Dataset d = dataset_for(e);
  expect_digest(d, e["digest"]);
  check_mean(d, e, e, MeanMode::Linear, RegressorKind::OlsLinear);
}

TEST(ReferenceExamples, PointQuantile) {
  const auto& e = reference_values()["examples"]["point_quantile_b1_t05_n2000_s5"];
  const Dataset d = dataset_for(e);
  expect_digest(d, e["digest"]);
  check_quantile(d, e, e);
}

TEST(ReferenceExamples, SplitQuantile) {
  const auto& e = reference_values()["examples"]["split_quantile_b05_t025_n1000_s9"];
  const Dataset d = dataset_for(e);
  expect_digest(d, e["digest"]);
  check_quantile(d, e, e);
}

TEST(ReferenceExamples, LinRegComponents) {
  const auto& e = reference_values()["examples"]["components_linreg_b1_n2000_s13"];
  const Dataset d = dataset_for(e);
  expect_digest(d, e["digest"]);
  check_linreg(d, e, e);
}
