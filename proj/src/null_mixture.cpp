#include "ebma/null_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebma/errors.hpp"
#include "ebma/regression.hpp"
#include "ebma/simplex.hpp"

namespace ebma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

VectorXd local_beta_from_stats(const ModelStats& stats, const VectorXd& beta_ls,
                               const VectorXd& theta, double g) {
  const double lbf = log_bf_from_stats(stats, theta, g);
  const double pi_star = two_model_posterior(lbf);
  const double rho = g / (1.0 + g);
  return pi_star * ((1.0 - rho) * theta + rho * beta_ls);
}

}  // namespace

double two_model_posterior(double log_bf, double prior_odds) {
  if (!(prior_odds > 0.0)) {
    throw InvalidInputError("two_model_posterior: prior odds must be positive");
  }
  return stable_sigmoid(log_bf + std::log(prior_odds));
}

VectorXd local_bma_beta(const OlsFit& fit, const VectorXd& theta, double g,
                        const Dataset& data) {
  if (!(g > 0.0)) throw InvalidInputError("local_bma_beta: g must be positive");
  if (theta.size() != fit.k) {
    throw InvalidInputError("local_bma_beta: theta length does not match model");
  }
  return local_beta_from_stats(model_stats(data, fit), fit.beta_ls, theta, g);
}

NullMixFit fit_null_mixture_model(const Dataset& data, const ModelIndex& model,
                                  const VectorXd& target_beta) {
  if (model.is_null()) {
    throw InvalidInputError("fit_null_mixture_model: model must be non-null");
  }
  const OlsFit fit = ols_fit(data, model);
  const ModelStats stats = model_stats(data, fit);
  if (target_beta.size() != fit.k) {
    throw InvalidInputError("fit_null_mixture_model: target length mismatch");
  }
  const VectorXd& beta_robust = target_beta;
  const int k = fit.k;
  const double log_n = std::log(static_cast<double>(fit.n));

  // Objective over (theta, log g); regions where the marginal bracket
  // underflows are treated as infeasible.
  auto objective = [&](const Eigen::VectorXd& v) {
    const VectorXd theta = v.head(k);
    const double g = std::exp(v[k]);
    if (!(g > 0.0) || !std::isfinite(g)) return kInf;
    try {
      return (local_beta_from_stats(stats, fit.beta_ls, theta, g) - beta_robust)
          .squaredNorm();
    } catch (const NumericError&) {
      return kInf;
    }
  };

  std::vector<Eigen::VectorXd> starts(3, Eigen::VectorXd::Zero(k + 1));
  starts[0][k] = log_n;
  starts[1].head(k) = beta_robust;
  starts[1][k] = log_n;
  starts[2].head(k) = beta_robust;
  starts[2][k] = 0.0;

  SimplexOptions opts;
  opts.max_evaluations = 5000;
  opts.f_tol_rel = 1e-10;
  opts.f_tol_abs = 1e-14;

  NullMixFit result;
  result.model = model;
  result.beta_robust = beta_robust;
  double best = kInf;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    const SimplexResult sr = nelder_mead(objective, starts[r], opts);
    result.evaluations += sr.evaluations;
    const double g = std::exp(sr.x[k]);
    // A restart that matches the best objective to within noise but with a
    // larger scale wins: small g means near-total confidence in the tuned
    // prior mean, which the tie-break avoids.
    const bool better = !std::isfinite(best)
                            ? std::isfinite(sr.value)
                            : sr.value < best - (1e-12 + 1e-6 * std::abs(best));
    const bool tied = std::isfinite(best) &&
                      std::abs(sr.value - best) <= 1e-12 + 1e-6 * std::abs(best) &&
                      g > result.g_hat;
    if (better || tied) {
      best = std::min(best, sr.value);
      result.theta_hat = sr.x.head(k);
      result.g_hat = g;
      result.objective = sr.value;
      result.best_restart = static_cast<int>(r);
      result.converged = sr.converged;
    }
  }
  if (!std::isfinite(best)) {
    throw NumericError("fit_null_mixture_model: no feasible point found");
  }
  return result;
}

NullMixFit fit_null_mixture_model(const Dataset& data, const ModelIndex& model,
                                  double trim_frac) {
  return fit_null_mixture_model(data, model, robust_beta(data, model, trim_frac));
}

NullMixtureEnsemble fit_null_mixture_ensemble(const Dataset& data,
                                              const std::vector<ModelIndex>& models,
                                              const ModelPrior& prior,
                                              double trim_frac) {
  std::vector<ModelIndex> sorted = models;
  std::sort(sorted.begin(), sorted.end(), canonical_less);

  NullMixtureEnsemble out;
  std::vector<GPriorSetting> settings;
  for (const auto& m : sorted) {
    if (m.is_null()) continue;
    NullMixFit fit = fit_null_mixture_model(data, m, trim_frac);
    if (!fit.converged) ++out.convergence_warnings;
    settings.push_back({m, fit.theta_hat, fit.g_hat, GStrategy::NullMixture});
    out.fits.push_back(std::move(fit));
  }
  out.posterior = ensemble_posterior(data, settings, prior);
  return out;
}

}  // namespace ebma
