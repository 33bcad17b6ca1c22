#include "fusionutil/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fusionutil/error.hpp"

namespace fusionutil::stats {

double mean(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) throw Error(ErrorCode::EmptyData, "mean of an empty vector");
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
  return s / static_cast<double>(v.size());
}

double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "sample variance needs two observations");
  }
  const double m = mean(v);
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (v(i) - m) * (v(i) - m);
  return s / static_cast<double>(v.size() - 1);
}

double interpolated_quantile(const Eigen::Ref<const Eigen::VectorXd>& v, double p) {
  if (v.size() == 0) throw Error(ErrorCode::EmptyData, "quantile of an empty vector");
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  const double h = static_cast<double>(s.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

bool is_degenerate(const Eigen::Ref<const Eigen::VectorXd>& v, double variance) {
  const double scale = v.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;
  return variance <= tol * tol;
}

}  // namespace fusionutil::stats
