#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fusionutil/core.hpp"
#include "fusionutil/dataset.hpp"
#include "fusionutil/nuisance.hpp"
#include "fusionutil/random.hpp"

namespace fusionutil {

// Y = b (S + W) + eps with (S, W) standard bivariate normal, corr rho.
struct DgpConfig {
  double b = 0.0;
  double rho = 0.2;
  std::size_t n = 1000;
  double nu = 0.5;
  std::uint64_t seed = 0;
};

void validate(const DgpConfig& cfg);

// Draws from CounterRng(cfg.seed, kStreamData); columns are named S and W.
Dataset generate_dgp(const DgpConfig& cfg);
Dataset generate_dgp(const DgpConfig& cfg, CounterRng& stream);

// ---------------------------------------------------------------------------
// Population values of theta under the DGP

double true_theta_mean(double b, double rho, double nu);
double true_theta_quantile(double b, double rho, double nu, double tau);
double true_theta_linreg(double b, double rho, double nu);

// E f(Z) for Z ~ N(0, sd^2) by Gauss-Hermite quadrature, doubling the node
// count until successive values agree to `tol`.
template <typename Fn>
double gauss_hermite_expectation(Fn&& f, double sd, double tol = 1e-12);

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // for the weight function exp(-x^2)
};

// Golub-Welsch rule with `order` nodes.
GaussHermiteRule gauss_hermite_rule(std::size_t order);

// ---------------------------------------------------------------------------
// Monte Carlo cells

struct CellConfig {
  Method method = Method::MeanLinear;
  DgpConfig dgp;
  double tau = 0.5;
  std::size_t folds = 5;
  double alpha = 0.95;
  RegressorSpec regressor;  // conditional-mean or conditional-CDF regressor
  std::size_t s_index = 0;
};

// Population theta for the cell's method and DGP.
double cell_truth(const CellConfig& cell);

// Runs the cell's assessment on `data` with cross-fitting seed `seed`.
UtilityEstimate assess_cell(const CellConfig& cell, const Dataset& data, std::uint64_t seed);

struct ReportRow {
  Method method = Method::MeanLinear;
  double b = 0.0;
  std::size_t n = 0;
  std::string extra;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double mae = 0.0;
  double sdae = 0.0;
  double al = 0.0;
  double cr = 0.0;
  double theta0 = 0.0;
  std::size_t failures = 0;
  bool flagged = false;  // more than 1% of replications failed
};

// Replication r uses seed derive_seed(seed, r) for both data generation and
// cross-fitting. `threads` = 0 uses the hardware concurrency. Results do not
// depend on the thread count.
ReportRow run_monte_carlo(const CellConfig& cell, std::size_t reps, std::uint64_t seed,
                          std::size_t threads = 0);

std::string cell_extra(const CellConfig& cell);

// CSV with header method,b,n,extra,reps,seed,MAE,SDAE,AL,CR (unscaled values).
void write_csv(std::ostream& os, const std::vector<ReportRow>& rows);

// Fixed-width table with MAE, SDAE, AL and CR multiplied by 100.
void write_text_table(std::ostream& os, const std::vector<ReportRow>& rows);

// ---------------------------------------------------------------------------

template <typename Fn>
double gauss_hermite_expectation(Fn&& f, double sd, double tol) {
  constexpr double kInvSqrtPi = 0.56418958354775628695;
  const double scale = 1.4142135623730950488 * sd;
  auto eval = [&](std::size_t order) {
    const auto rule = gauss_hermite_rule(order);
    double s = 0.0;
    for (std::size_t i = 0; i < order; ++i) s += rule.weights[i] * f(scale * rule.nodes[i]);
    return s * kInvSqrtPi;
  };
  double prev = eval(16);
  for (std::size_t order = 32; order <= 512; order *= 2) {
    const double cur = eval(order);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace fusionutil
