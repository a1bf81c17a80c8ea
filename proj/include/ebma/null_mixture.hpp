#pragma once

#include <vector>

#include "ebma/gprior.hpp"

namespace ebma {

/// Result of tuning {theta, g} for one model so that the two-model
/// (model vs intercept-only) averaged coefficients match the trimmed
/// robust estimate in squared distance.
struct NullMixFit {
  ModelIndex model;
  VectorXd theta_hat;
  double g_hat = 1.0;
  double objective = 0.0;  // achieved squared distance
  VectorXd beta_robust;
  int evaluations = 0;
  int best_restart = 0;
  bool converged = false;
};

/// Posterior probability of the model when the space holds only the model
/// and the null model: (1 + exp(-log_bf)/prior_odds)^-1, overflow-safe.
/// prior_odds = pi(model)/pi(null), default even odds.
double two_model_posterior(double log_bf, double prior_odds = 1.0);

/// Two-model averaged coefficients at (theta, g):
/// pi*(model|Y) [ (1/(1+g)) theta + (g/(1+g)) beta_ls ].
VectorXd local_bma_beta(const OlsFit& fit, const VectorXd& theta, double g,
                        const Dataset& data);

/// Minimize || local averaged coefficients - target ||^2 over
/// (theta, log g) by simplex search with three restarts covering the
/// shrink-to-zero and shrink-to-target attractors.
NullMixFit fit_null_mixture_model(const Dataset& data, const ModelIndex& model,
                                  const VectorXd& target_beta);

/// Same, with the target taken as the Cook's-distance-trimmed robust fit.
NullMixFit fit_null_mixture_model(const Dataset& data, const ModelIndex& model,
                                  double trim_frac);

struct NullMixtureEnsemble {
  EnsemblePosterior posterior;
  std::vector<NullMixFit> fits;  // non-null models in canonical order
  int convergence_warnings = 0;
};

/// Tune every non-null model, then assemble the full-space posterior from
/// the marginals evaluated at the tuned hyperparameters under the original
/// model prior.
NullMixtureEnsemble fit_null_mixture_ensemble(const Dataset& data,
                                              const std::vector<ModelIndex>& models,
                                              const ModelPrior& prior,
                                              double trim_frac);

}  // namespace ebma
