#include "fusionutil/core.hpp"

#include <array>
#include <cmath>
#include <string>

namespace fusionutil {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::MissingInterval: return "MissingInterval";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::BadFoldCount: return "BadFoldCount";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::ZeroDispersion: return "ZeroDispersion";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::VanishingDensity: return "VanishingDensity";
    case ErrorCode::ZeroSColumn: return "ZeroSColumn";
    case ErrorCode::DegenerateResidualVariance: return "DegenerateResidualVariance";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyData: return "EmptyData";
  }
  return "Unknown";
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::MeanConditional: return "mean-conditional";
    case Method::MeanLinear: return "mean-linear";
    case Method::Quantile: return "quantile";
    case Method::LinReg: return "linreg";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "mean-conditional") return Method::MeanConditional;
  if (name == "mean-linear") return Method::MeanLinear;
  if (name == "quantile") return Method::Quantile;
  if (name == "linreg") return Method::LinReg;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw Error(ErrorCode::InvalidArgument, "interval endpoints must be finite with lo <= hi");
  }
}

// ---------------------------------------------------------------------------
// Standard normal

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) noexcept {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

using Coef = std::array<double, 8>;

// Coefficients of AS241, lowest order first.
constexpr Coef kA = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                     1.9715909503065514427e+3, 1.3731693765509461125e+4,
                     4.5921953931549871457e+4, 6.7265770927008700853e+4,
                     3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr Coef kB = {1.0,
                     4.2313330701600911252e+1, 6.8718700749205790830e+2,
                     5.3941960214247511077e+3, 2.1213794301586595867e+4,
                     3.9307895800092710610e+4, 2.8729085735721942674e+4,
                     5.2264952788528545610e+3};
constexpr Coef kC = {1.42343711074968357734e0,  4.63033784615654529590e0,
                     5.76949722146069140550e0,  3.64784832476320460504e0,
                     1.27045825245236838258e0,  2.41780725177450611770e-1,
                     2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr Coef kD = {1.0,
                     2.05319162663775882187e0,  1.67638483018380384940e0,
                     6.89767334985100004550e-1, 1.48103976427480074590e-1,
                     1.51986665636164571966e-2, 5.47593808499534494600e-4,
                     1.05075007164441684324e-9};
constexpr Coef kE = {6.65790464350110377720e0,  5.46378491116411436990e0,
                     1.78482653991729133580e0,  2.96560571828504891230e-1,
                     2.65321895265761230930e-2, 1.24266094738807843860e-3,
                     2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr Coef kF = {1.0,
                     5.99832206555887937690e-1, 1.36929880922735805310e-1,
                     1.48753612908506148525e-2, 7.86869131145613259100e-4,
                     1.84631831751005468180e-5, 1.42151175831644588870e-7,
                     2.04426310338993978564e-15};

double horner(const Coef& c, double r) noexcept {
  double acc = c[7];
  for (int j = 6; j >= 0; --j) acc = acc * r + c[j];
  return acc;
}

}  // namespace

double normal_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "normal_quantile requires 0 < alpha < 1");
  }
  const double q = alpha - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(kA, r) / horner(kB, r);
  }
  double r = q < 0.0 ? alpha : 1.0 - alpha;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = horner(kC, r) / horner(kD, r);
  } else {
    r -= 5.0;
    x = horner(kE, r) / horner(kF, r);
  }
  return q < 0.0 ? -x : x;
}

// ---------------------------------------------------------------------------

namespace {
double truncate_endpoint(double l) noexcept {
  return l * ((0.0 < l && l < 1.0) ? 1.0 : 0.0) + (l >= 1.0 ? 1.0 : 0.0);
}
}  // namespace

Interval truncate_interval(const Interval& L) noexcept {
  Interval out;
  out.lo = truncate_endpoint(L.lo);
  out.hi = truncate_endpoint(L.hi);
  return out;
}

double truncate_point(double x) noexcept { return truncate_interval(Interval{x, x}).lo; }

double ratio_estimate(const BoundPair& bp) {
  if (!std::isfinite(bp.theta1_hat)) {
    throw Error(ErrorCode::InvalidArgument, "theta1_hat is not finite");
  }
  if (!std::isfinite(bp.theta2_hat) || bp.theta2_hat <= 0.0) {
    throw Error(ErrorCode::DegenerateDenominator,
                "internal-only bound estimate must be positive and finite");
  }
  return bp.theta1_hat / bp.theta2_hat;
}

Interval wald_interval(double center, double gamma_hat, std::size_t n, double alpha) {
  if (!(gamma_hat >= 0.0) || n < 1) {
    throw Error(ErrorCode::InvalidArgument, "wald_interval requires gamma_hat >= 0 and n >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "confidence level must lie in (0, 1)");
  }
  const double half =
      gamma_hat * normal_quantile((1.0 + alpha) / 2.0) / std::sqrt(static_cast<double>(n));
  return Interval{center - half, center + half};
}

RelativeUtility relative_utility(const UtilityEstimate& u) {
  if (!u.ci) throw Error(ErrorCode::MissingInterval, "relative utility needs an interval");
  if (!(u.nu < 1.0)) throw Error(ErrorCode::OutOfRange, "nu must be below 1");
  const double scale = 1.0 - u.nu;
  RelativeUtility r;
  r.point = (1.0 - u.theta_hat) / scale;
  r.ci = Interval{(1.0 - u.ci->hi) / scale, (1.0 - u.ci->lo) / scale};
  return r;
}

}  // namespace fusionutil
