#include "ebma/dataset.hpp"

#include "ebma/errors.hpp"

namespace ebma {

std::pair<MatrixXd, VectorXd> center_columns(const MatrixXd& x_raw) {
  if (x_raw.rows() < 1 || x_raw.cols() < 1) {
    throw InvalidInputError("center_columns: empty matrix");
  }
  const VectorXd means = x_raw.colwise().mean();
  MatrixXd centered = x_raw.rowwise() - means.transpose();
  return {std::move(centered), means};
}

Dataset::Dataset(VectorXd y_in, MatrixXd x_in)
    : y(std::move(y_in)), x_raw(std::move(x_in)) {
  if (y.size() != x_raw.rows()) {
    throw InvalidInputError("Dataset: response length does not match design rows");
  }
  if (y.size() < 3) {
    throw InvalidInputError("Dataset: need at least 3 cases");
  }
  auto [centered, means] = center_columns(x_raw);
  x_centered = std::move(centered);
  col_means = std::move(means);
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  VectorXd ys(static_cast<Eigen::Index>(rows.size()));
  MatrixXd xs(static_cast<Eigen::Index>(rows.size()), x_raw.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= n()) throw InvalidInputError("Dataset::subset: row out of range");
    ys[static_cast<Eigen::Index>(i)] = y[r];
    xs.row(static_cast<Eigen::Index>(i)) = x_raw.row(r);
  }
  return Dataset(std::move(ys), std::move(xs));
}

}  // namespace ebma
