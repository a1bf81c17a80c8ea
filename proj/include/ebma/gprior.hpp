#pragma once

#include <vector>

#include "ebma/dataset.hpp"
#include "ebma/model_space.hpp"
#include "ebma/regression.hpp"

namespace ebma {

enum class GStrategy { FixedG, EBLocal, EBGlobal, HyperGN, NullMixture };

/// Per-model hyperparameters of the normal coefficient prior
/// N(theta, g sigma^2 (X'X)^-1) on the centered design.
struct GPriorSetting {
  ModelIndex model;
  VectorXd theta;  // length k; zero vector for the zero-mean strategies
  double g = 1.0;
  GStrategy strategy = GStrategy::FixedG;

  static GPriorSetting zero_mean(const ModelIndex& m, double g, GStrategy s) {
    return {m, VectorXd::Zero(m.size()), g, s};
  }
};

/// Sufficient statistics for the marginal-likelihood formulas, computed
/// once per model so optimizer inner loops do not re-slice the design.
struct ModelStats {
  int n = 0;
  int k = 0;
  double sst = 0.0;
  double r_squared = 0.0;
  MatrixXd xtx;  // centered X_m' X_m
  VectorXd xty;  // centered X_m' (y - ybar)
};

ModelStats model_stats(const Dataset& data, const OlsFit& fit);

/// log Bayes factor of the model against the intercept-only null model,
///   ((n-k-1)/2) log(1+g) - ((n-1)/2) log(1 + g(1-R^2) + t/SST),
/// t = theta'X'X theta - 2 theta'X'(y - ybar). The bracket is positive in
/// exact arithmetic; if cancellation drives it non-positive this throws
/// NumericError rather than clamping.
double log_bf_from_stats(const ModelStats& stats, const VectorXd& theta, double g);

/// Log marginal likelihood of the intercept-only model, the g-free factor
/// shared by every model:
///   lgamma((n-1)/2) - ((n-1)/2) log(pi) - (1/2) log n - ((n-1)/2) log SST.
double log_null_marginal(int n, double sst);
double log_null_marginal(const Dataset& data);

/// Log marginal likelihood of the model under its prior setting. The null
/// model is computed with the g- and theta-terms absent; theta = 0 reduces
/// exactly to the zero-mean expression.
double log_marginal(const OlsFit& fit, const GPriorSetting& setting, const Dataset& data);

double log_bayes_factor_vs_null(const OlsFit& fit, const GPriorSetting& setting,
                                const Dataset& data);

/// Posterior mean of the coefficients: (1/(1+g)) theta + (g/(1+g)) beta_ls.
VectorXd posterior_mean_beta(const OlsFit& fit, const GPriorSetting& setting);

/// Posterior over an enumerated model set plus the model-averaged
/// coefficient vector, everything needed to predict new cases.
struct EnsemblePosterior {
  std::vector<ModelIndex> models;
  VectorXd log_marginals;
  VectorXd post_probs;
  VectorXd inclusion_probs;  // length p
  VectorXd beta_bma;         // length p
  double ybar_train = 0.0;
  VectorXd col_means;
};

/// Assemble from per-model marginals and coefficient means (model order as
/// given). Posterior probabilities are normalized through log-sum-exp.
EnsemblePosterior assemble_ensemble(const Dataset& data,
                                    const std::vector<ModelIndex>& models,
                                    const VectorXd& log_marginals,
                                    const std::vector<VectorXd>& coef_means,
                                    const ModelPrior& prior);

/// Posterior over {null model} + the settings' models under the given
/// model prior; per-model coefficients are the g-prior posterior means.
EnsemblePosterior ensemble_posterior(const Dataset& data,
                                     const std::vector<GPriorSetting>& settings,
                                     const ModelPrior& prior);

/// yhat = ybar + (x_raw - col_means') beta.
VectorXd predict_plane(double ybar, const VectorXd& col_means, const VectorXd& beta,
                       const MatrixXd& x_test_raw);

VectorXd predict(const EnsemblePosterior& post, const MatrixXd& x_test_raw);

// ---------------------------------------------------------------------------
// Diagnostics for the stylized one-predictor instance with a single shifted
// case, used to study how the shrinkage factor drives prediction error.
// ---------------------------------------------------------------------------

/// x_i = i - 1 - (n-1)/2; y_i = beta_true * x_i except the last case,
/// which is shifted: y_n = beta_true * x_n - shift.
Dataset make_single_outlier_dataset(int n, double beta_true, double shift);

/// Expected mean squared prediction error of the averaged plane
/// yhat = s * beta_ls * x - shift/n against uncontaminated test responses
/// beta_true * x + noise, as a function of the averaged shrinkage s:
///   (1/n)[(beta - s beta_ls)^2 sum(x~^2) + 2 (shift/n)(beta - s beta_ls) sum(x~)]
///     + shift^2/n^2 + sigma2.
double expected_mspe_single_outlier(double s, double beta_true, double shift,
                                    double sigma2, const VectorXd& x_test,
                                    double beta_ls);

}  // namespace ebma
