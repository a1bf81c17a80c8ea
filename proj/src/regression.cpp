#include "ebma/regression.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ebma/errors.hpp"

namespace ebma {

namespace {

MatrixXd select_columns(const MatrixXd& x, const std::vector<int>& cols) {
  MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  }
  return out;
}

}  // namespace

OlsFit ols_fit(const Dataset& data, const ModelIndex& model) {
  if (model.p != data.p()) {
    throw InvalidInputError("ols_fit: model length does not match design");
  }
  const int n = static_cast<int>(data.n());
  const int k = model.size();
  if (n <= k + 1) {
    throw InvalidInputError("ols_fit: need n > k + 1");
  }

  OlsFit fit;
  fit.model = model;
  fit.n = n;
  fit.k = k;
  fit.alpha_hat = data.ybar();

  const VectorXd yc = data.y.array() - fit.alpha_hat;
  fit.sst = yc.squaredNorm();

  if (k == 0) {
    fit.beta_ls = VectorXd();
    fit.residuals = yc;
    fit.sse = fit.sst;
    fit.r_squared = 0.0;
    fit.leverages = VectorXd::Constant(n, 1.0 / n);
  } else {
    const MatrixXd xg = select_columns(data.x_centered, model.predictors());
    Eigen::ColPivHouseholderQR<MatrixXd> qr(xg);
    if (qr.rank() < k) {
      throw SingularDesignError("ols_fit: rank-deficient design for model " +
                                model.bitstring());
    }
    fit.beta_ls = qr.solve(yc);
    fit.residuals = yc - xg * fit.beta_ls;
    fit.sse = fit.residuals.squaredNorm();
    fit.r_squared = fit.sst > 0.0 ? 1.0 - fit.sse / fit.sst : 0.0;

    // Leverages from the thin Q factor of the centered design plus the
    // intercept share.
    const MatrixXd thin_q =
        qr.householderQ() * MatrixXd::Identity(n, k);
    fit.leverages = thin_q.rowwise().squaredNorm().array() + 1.0 / n;
  }
  fit.sigma2_hat = fit.sse / (n - k - 1);
  fit.cooks_d = cooks_distance(fit);
  return fit;
}

VectorXd cooks_distance(const OlsFit& fit) {
  if (fit.n <= 0 || fit.sigma2_hat < 0.0) {
    throw InvalidInputError("cooks_distance: invalid fit");
  }
  const int n = fit.n;
  const double params = fit.k + 1.0;
  VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    const double h = fit.leverages[i];
    const double one_minus_h = 1.0 - h;
    if (one_minus_h <= 0.0) {
      d[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double e = fit.residuals[i];
    if (fit.sigma2_hat == 0.0) {
      d[i] = e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      continue;
    }
    d[i] = e * e * h / (params * fit.sigma2_hat * one_minus_h * one_minus_h);
  }
  return d;
}

std::vector<int> trimmed_rows(const Dataset& data, const ModelIndex& model,
                              double trim_frac) {
  if (!(trim_frac >= 0.0 && trim_frac < 0.5)) {
    throw InvalidInputError("trimmed_rows: trim_frac must lie in [0, 0.5)");
  }
  const int n = static_cast<int>(data.n());
  const int k = model.size();
  const int n_drop = static_cast<int>(std::ceil(trim_frac * n));
  if (n - n_drop <= k + 1) {
    throw InvalidInputError("trimmed_rows: too few cases left after trimming");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (n_drop == 0) return order;

  // Drop the n_drop largest Cook's distances; on ties the lower row index
  // is retained, so the higher index is dropped first.
  const OlsFit fit = ols_fit(data, model);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fit.cooks_d[a] != fit.cooks_d[b]) return fit.cooks_d[a] > fit.cooks_d[b];
    return a > b;
  });
  std::vector<int> keep(order.begin() + n_drop, order.end());
  std::sort(keep.begin(), keep.end());
  return keep;
}

VectorXd robust_beta(const Dataset& data, const ModelIndex& model, double trim_frac) {
  const std::vector<int> keep = trimmed_rows(data, model, trim_frac);
  if (static_cast<int>(keep.size()) == static_cast<int>(data.n())) {
    return ols_fit(data, model).beta_ls;
  }
  return ols_fit(data.subset(keep), model).beta_ls;
}

}  // namespace ebma
