#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "fusionutil/error.hpp"

namespace fusionutil {

// Closed interval [lo, hi] with finite endpoints.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo, double hi);

  double length() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return lo <= v && v <= hi; }
};

// Estimated traces of the data-fusion and internal-only efficiency bounds.
struct BoundPair {
  double theta1_hat = 0.0;
  double theta2_hat = 0.0;
};

enum class Method { MeanConditional, MeanLinear, Quantile, LinReg };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);

// One utility assessment. Raw quantities come straight from the estimators;
// `theta_hat` and `ci` are their images under the truncation map.
struct UtilityEstimate {
  double theta_hat_raw = 0.0;
  double theta_hat = 0.0;
  std::optional<double> theta_tilde_raw;
  double gamma_hat = 0.0;
  std::optional<Interval> ci_raw;
  std::optional<Interval> ci;
  BoundPair bounds;
  double nu = 0.0;
  std::size_t n = 0;
  double alpha = 0.95;
  Method method = Method::MeanLinear;
};

struct RelativeUtility {
  double point = 0.0;
  Interval ci;
};

// ---------------------------------------------------------------------------
// Standard normal

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

// Wichura's AS241 (PPND16); |Phi(u) - alpha| stays at the 1e-16 level.
double normal_quantile(double alpha);

// ---------------------------------------------------------------------------
// Truncation onto the parameter space (0, 1]

Interval truncate_interval(const Interval& L) noexcept;
double truncate_point(double x) noexcept;

double ratio_estimate(const BoundPair& bp);

// [center -/+ gamma_hat * u_{(1+alpha)/2} / sqrt(n)]
Interval wald_interval(double center, double gamma_hat, std::size_t n, double alpha);

// (1 - theta) / (1 - nu) with the interval mapped and its endpoints swapped.
RelativeUtility relative_utility(const UtilityEstimate& u);

// Runs a variance computation, mapping DegenerateVariance to 0 so that a
// degenerate sample yields a zero-width interval.
template <typename Fn>
double variance_or_zero(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateVariance) throw;
    return 0.0;
  }
}

}  // namespace fusionutil
