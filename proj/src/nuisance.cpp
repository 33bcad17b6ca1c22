#include "fusionutil/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "fusionutil/core.hpp"
#include "fusionutil/random.hpp"
#include "fusionutil/stats.hpp"

namespace fusionutil {

namespace {
constexpr double kMaxCondition = 1e12;

// Condition number of a symmetric positive semi-definite matrix, +inf when
// its smallest eigenvalue is not positive.
double spd_condition(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}
}  // namespace

// ---------------------------------------------------------------------------
// SplitPlan

std::vector<std::size_t> SplitPlan::fold(std::size_t m) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] == m) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::complement(std::size_t m) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] != m) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(folds, 0);
  for (auto f : assignment) ++sizes[f];
  return sizes;
}

SplitPlan make_split_plan(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::BadFoldCount, "need at least two folds");
  if (n < 2 * folds) {
    throw Error(ErrorCode::TooFewObservations,
                "n = " + std::to_string(n) + " is below 2M = " + std::to_string(2 * folds));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(seed, kStreamSplit);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(std::floor(rng.uniform() * static_cast<double>(i + 1)));
    std::swap(perm[i], perm[j]);
  }

  SplitPlan plan;
  plan.n = n;
  plan.folds = folds;
  plan.seed = seed;
  plan.assignment.assign(n, 0);
  const std::size_t q = n / folds;
  const std::size_t r = n % folds;
  std::size_t pos = 0;
  for (std::size_t m = 0; m < folds; ++m) {
    const std::size_t size = q + (m < r ? 1 : 0);
    for (std::size_t k = pos; k < pos + size; ++k) plan.assignment[perm[k]] = m;
    pos += size;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// OLS

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool intercept) {
  if (x.rows() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y row counts differ");
  Eigen::MatrixXd design(x.rows(), x.cols() + (intercept ? 1 : 0));
  if (intercept) {
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
  } else {
    design = x;
  }
  const Eigen::MatrixXd gram = design.transpose() * design;
  if (spd_condition(gram) > kMaxCondition) {
    throw Error(ErrorCode::SingularDesign, "design Gram matrix is numerically singular");
  }
  return design.colPivHouseholderQr().solve(y);
}

// ---------------------------------------------------------------------------
// Regressors

std::string_view to_string(RegressorKind k) noexcept {
  switch (k) {
    case RegressorKind::OlsLinear: return "ols-linear";
    case RegressorKind::KNearest: return "k-nn";
    case RegressorKind::LocalLinear: return "local-linear";
  }
  return "unknown";
}

RegressorKind parse_regressor_kind(std::string_view name) {
  if (name == "ols-linear") return RegressorKind::OlsLinear;
  if (name == "k-nn") return RegressorKind::KNearest;
  if (name == "local-linear") return RegressorKind::LocalLinear;
  throw Error(ErrorCode::InvalidArgument, "unknown regressor '" + std::string(name) + "'");
}

Regressor Regressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const RegressorSpec& spec) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyData, "empty training sample");
  if (x.rows() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y row counts differ");

  Regressor r;
  r.kind_ = spec.kind;
  switch (spec.kind) {
    case RegressorKind::OlsLinear:
      r.coef_ = ols_fit(x, y, true);
      break;
    case RegressorKind::KNearest: {
      const double n = static_cast<double>(x.rows());
      const std::size_t k =
          spec.neighbors ? *spec.neighbors
                         : static_cast<std::size_t>(std::ceil(std::pow(n, 0.8) / 4.0));
      if (k < 1) throw Error(ErrorCode::InvalidArgument, "k-nn needs k >= 1");
      r.neighbors_ = std::min<std::size_t>(k, static_cast<std::size_t>(x.rows()));
      r.train_x_ = x;
      r.train_y_ = y;
      break;
    }
    case RegressorKind::LocalLinear: {
      if (spec.bandwidths) {
        if (spec.bandwidths->size() != static_cast<std::size_t>(x.cols())) {
          throw Error(ErrorCode::InvalidArgument, "need one bandwidth per covariate");
        }
        for (double h : *spec.bandwidths) {
          if (!(h > 0.0) || !std::isfinite(h)) {
            throw Error(ErrorCode::InvalidArgument, "bandwidths must be positive");
          }
        }
        r.bandwidths_ = *spec.bandwidths;
      } else {
        for (Eigen::Index d = 0; d < x.cols(); ++d) {
          r.bandwidths_.push_back(silverman_bandwidth(x.col(d)));
        }
      }
      r.train_x_ = x;
      r.train_y_ = y;
      break;
    }
  }
  return r;
}

double Regressor::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x0) const {
  switch (kind_) {
    case RegressorKind::OlsLinear:
      return coef_(0) + x0.dot(coef_.tail(coef_.size() - 1));
    case RegressorKind::KNearest:
      return predict_knn(x0);
    case RegressorKind::LocalLinear:
      return predict_local_linear(x0);
  }
  return 0.0;
}

Eigen::VectorXd Regressor::predict_rows(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(x.row(i));
  return out;
}

// Weighted least squares of y on (1, X - x0) with product Gaussian weights;
// the intercept is the fit at x0. Falls back to the Nadaraya-Watson mean when
// the local design is numerically singular.
double Regressor::predict_local_linear(const Eigen::Ref<const Eigen::RowVectorXd>& x0) const {
  const Eigen::Index n = train_x_.rows();
  const Eigen::Index p = train_x_.cols();

  Eigen::VectorXd lw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = 0.0;
    for (Eigen::Index d = 0; d < p; ++d) {
      const double t = (train_x_(i, d) - x0(d)) / bandwidths_[static_cast<std::size_t>(d)];
      u += t * t;
    }
    lw(i) = -0.5 * u;
  }
  const double top = lw.maxCoeff();

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd z(p + 1);
  double sw = 0.0;
  double swy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = std::exp(lw(i) - top);
    z(0) = 1.0;
    for (Eigen::Index d = 0; d < p; ++d) z(d + 1) = train_x_(i, d) - x0(d);
    a.noalias() += w * z * z.transpose();
    c.noalias() += (w * train_y_(i)) * z;
    sw += w;
    swy += w * train_y_(i);
  }
  if (spd_condition(a) <= kMaxCondition) {
    return a.ldlt().solve(c)(0);
  }
  return swy / sw;
}

double Regressor::predict_knn(const Eigen::Ref<const Eigen::RowVectorXd>& x0) const {
  const Eigen::Index n = train_x_.rows();
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(train_x_.row(i) - x0).squaredNorm(), i};
  }
  const auto k = static_cast<std::ptrdiff_t>(neighbors_);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double s = 0.0;
  for (std::ptrdiff_t j = 0; j < k; ++j) s += train_y_(dist[static_cast<std::size_t>(j)].second);
  return s / static_cast<double>(k);
}

Regressor fit_conditional_mean(const Dataset& train, const RegressorSpec& spec) {
  return Regressor::fit(train.x(), train.y(), spec);
}

Eigen::VectorXd crossfit_predict(const Dataset& data, const SplitPlan& plan,
                                 const RegressorSpec& spec, const CrossfitTarget& target) {
  if (plan.n != data.n() || plan.assignment.size() != data.n()) {
    throw Error(ErrorCode::PlanMismatch, "split plan size differs from dataset size");
  }
  const bool cdf = target.kind == CrossfitTarget::Kind::ConditionalCdf;
  if (cdf && !std::isfinite(target.level)) {
    throw Error(ErrorCode::InvalidArgument, "cdf level must be finite");
  }
  Eigen::VectorXd response = data.y();
  if (cdf) {
    for (Eigen::Index i = 0; i < response.size(); ++i) {
      response(i) = data.y()(i) < target.level ? 1.0 : 0.0;
    }
  }

  Eigen::VectorXd out(static_cast<Eigen::Index>(data.n()));
  for (std::size_t m = 0; m < plan.folds; ++m) {
    const auto train = plan.complement(m);
    const auto test = plan.fold(m);
    Eigen::MatrixXd tx(static_cast<Eigen::Index>(train.size()), data.x().cols());
    Eigen::VectorXd ty(static_cast<Eigen::Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(train[k]);
      tx.row(static_cast<Eigen::Index>(k)) = data.x().row(r);
      ty(static_cast<Eigen::Index>(k)) = response(r);
    }
    const Regressor reg = Regressor::fit(tx, ty, spec);
    for (auto i : test) {
      const auto r = static_cast<Eigen::Index>(i);
      out(r) = reg.predict(data.x().row(r));
    }
  }
  if (cdf) out = out.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Quantiles and kernel smoothing

double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& y, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::OutOfRange, "tau must lie in (0, 1)");
  if (y.size() == 0) throw Error(ErrorCode::EmptyData, "quantile of an empty sample");
  std::vector<double> s(y.data(), y.data() + y.size());
  const auto n = static_cast<double>(s.size());
  auto k = static_cast<std::size_t>(std::ceil(n * tau));
  k = std::clamp<std::size_t>(k, 1, s.size());
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end());
  return s[k - 1];
}

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  if (sample.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "bandwidth needs at least two observations");
  }
  const double sd = std::sqrt(stats::sample_variance(sample));
  if (!(sd > 0.0)) throw Error(ErrorCode::ZeroDispersion, "sample has zero dispersion");
  const double iqr =
      stats::interpolated_quantile(sample, 0.75) - stats::interpolated_quantile(sample, 0.25);
  double a = std::min(sd, iqr / 1.34);
  if (!(a > 0.0)) a = sd;
  return 1.06 * a * std::pow(static_cast<double>(sample.size()), -0.2);
}

KernelDensity::KernelDensity(Eigen::VectorXd sample_, double bandwidth_)
    : sample(std::move(sample_)), bandwidth(bandwidth_) {
  if (sample.size() == 0) throw Error(ErrorCode::EmptyData, "kernel density needs a sample");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  }
}

double kde_eval(const KernelDensity& kd, double point) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < kd.sample.size(); ++i) {
    s += normal_pdf((point - kd.sample(i)) / kd.bandwidth);
  }
  return s / (static_cast<double>(kd.sample.size()) * kd.bandwidth);
}

ConditionalKernelDensity::ConditionalKernelDensity(Eigen::MatrixXd x_, Eigen::VectorXd y_,
                                                   std::vector<double> hx, double hy)
    : x(std::move(x_)), y(std::move(y_)), x_bandwidths(std::move(hx)), y_bandwidth(hy) {
  if (y.size() == 0) throw Error(ErrorCode::EmptyData, "kernel density needs a sample");
  if (x.rows() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y row counts differ");
  if (x_bandwidths.size() != static_cast<std::size_t>(x.cols())) {
    throw Error(ErrorCode::InvalidArgument, "need one bandwidth per covariate");
  }
  for (double h : x_bandwidths) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidths must be positive");
  }
  if (!(y_bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidths must be positive");
}

double cond_kde_eval(const ConditionalKernelDensity& kd,
                     const Eigen::Ref<const Eigen::RowVectorXd>& x0, double y0) {
  double num = 0.0;
  double den = 0.0;
  const Eigen::Index p = kd.x.cols();
  for (Eigen::Index i = 0; i < kd.y.size(); ++i) {
    double u = 0.0;
    for (Eigen::Index d = 0; d < p; ++d) {
      const double t = (x0(d) - kd.x(i, d)) / kd.x_bandwidths[static_cast<std::size_t>(d)];
      u += t * t;
    }
    const double w = std::exp(-0.5 * u);
    num += w * normal_pdf((y0 - kd.y(i)) / kd.y_bandwidth) / kd.y_bandwidth;
    den += w;
  }
  if (!(den > 0.0)) {
    throw Error(ErrorCode::EmptyNeighborhood, "all covariate kernel weights underflow at x0");
  }
  return num / den;
}

}  // namespace fusionutil
