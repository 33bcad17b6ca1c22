#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fusionutil {

// Internal sample: response y (length n) and covariates x (n x p), all finite.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> column_names = {},
          std::string response_name = "y");

  std::size_t n() const noexcept { return static_cast<std::size_t>(y_.size()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(x_.cols()); }

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  const std::string& response_name() const noexcept { return response_; }

  // Column index of a covariate by name; throws InvalidArgument if absent.
  std::size_t column_index(const std::string& name) const;

  Dataset rows(std::span<const std::size_t> idx) const;
  Dataset head(std::size_t count) const;
  Dataset tail_from(std::size_t first) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  std::vector<std::string> names_;
  std::string response_;
};

}  // namespace fusionutil
