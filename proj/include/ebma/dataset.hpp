#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace ebma {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Subtract column means. The means are returned so test points can later
/// be aligned with the training frame.
std::pair<MatrixXd, VectorXd> center_columns(const MatrixXd& x_raw);

/// Response vector plus the raw and column-centered design.
struct Dataset {
  VectorXd y;
  MatrixXd x_raw;
  MatrixXd x_centered;
  VectorXd col_means;

  Dataset(VectorXd y_in, MatrixXd x_in);

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return x_raw.cols(); }
  double ybar() const { return y.mean(); }

  /// New dataset from the given rows, re-centered within the subset.
  Dataset subset(const std::vector<int>& rows) const;
};

}  // namespace ebma
