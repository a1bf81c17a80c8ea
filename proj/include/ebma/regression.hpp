#pragma once

#include "ebma/dataset.hpp"
#include "ebma/model_space.hpp"

namespace ebma {

/// Least-squares summary for one model. The intercept is handled through
/// column centering: alpha_hat is always mean(y) and beta_ls solves the
/// centered problem. Leverages include the 1/n intercept share, so they
/// lie in [1/n, 1] and sum to k + 1.
struct OlsFit {
  ModelIndex model;
  double alpha_hat = 0.0;
  VectorXd beta_ls;
  VectorXd residuals;
  double sse = 0.0;
  double sst = 0.0;
  double r_squared = 0.0;
  VectorXd leverages;
  VectorXd cooks_d;
  double sigma2_hat = 0.0;
  int n = 0;
  int k = 0;
};

/// Fit the model's predictors by least squares on the centered design.
/// The solve goes through a rank-revealing orthogonal decomposition and
/// fails loudly on rank deficiency.
OlsFit ols_fit(const Dataset& data, const ModelIndex& model);

/// D_i = e_i^2 h_i / ((k+1) sigma2_hat (1-h_i)^2). A case with leverage 1
/// gets a +infinity sentinel.
VectorXd cooks_distance(const OlsFit& fit);

/// Rows that survive deleting the ceil(trim_frac * n) cases with the
/// largest Cook's distance for this model (ties keep the lower row index).
/// Returned ascending.
std::vector<int> trimmed_rows(const Dataset& data, const ModelIndex& model,
                              double trim_frac);

/// Least-squares coefficients refit on the trimmed rows, with the
/// covariates re-centered within the retained subset.
VectorXd robust_beta(const Dataset& data, const ModelIndex& model, double trim_frac);

}  // namespace ebma
