#include "fusionutil/dataset.hpp"

#include "fusionutil/error.hpp"

namespace fusionutil {

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> column_names,
                 std::string response_name)
    : y_(std::move(y)), x_(std::move(x)), names_(std::move(column_names)),
      response_(std::move(response_name)) {
  if (y_.size() < 1) throw Error(ErrorCode::EmptyData, "dataset has no observations");
  if (x_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "dataset has no covariates");
  if (x_.rows() != y_.size()) {
    throw Error(ErrorCode::InvalidArgument, "response length differs from covariate rows");
  }
  if (!y_.allFinite() || !x_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite values");
  }
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < x_.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  } else if (names_.size() != static_cast<std::size_t>(x_.cols())) {
    throw Error(ErrorCode::InvalidArgument, "column name count differs from covariate count");
  }
}

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return j;
  }
  throw Error(ErrorCode::InvalidArgument, "no covariate named '" + name + "'");
}

Dataset Dataset::rows(std::span<const std::size_t> idx) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), x_.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(idx[k]);
    y(static_cast<Eigen::Index>(k)) = y_(r);
    x.row(static_cast<Eigen::Index>(k)) = x_.row(r);
  }
  return Dataset(std::move(y), std::move(x), names_, response_);
}

Dataset Dataset::head(std::size_t count) const {
  const auto c = static_cast<Eigen::Index>(count);
  return Dataset(y_.head(c), x_.topRows(c), names_, response_);
}

Dataset Dataset::tail_from(std::size_t first) const {
  const auto c = static_cast<Eigen::Index>(n() - first);
  return Dataset(y_.tail(c), x_.bottomRows(c), names_, response_);
}

}  // namespace fusionutil
