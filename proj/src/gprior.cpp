#include "ebma/gprior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebma/errors.hpp"

namespace ebma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

MatrixXd select_columns(const MatrixXd& x, const std::vector<int>& cols) {
  MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  }
  return out;
}

void check_setting(const OlsFit& fit, const GPriorSetting& setting) {
  if (!(setting.model == fit.model)) {
    throw InvalidInputError("g-prior setting does not match the fitted model");
  }
  if (setting.theta.size() != fit.k) {
    throw InvalidInputError("g-prior theta length does not match the model size");
  }
  if (!(setting.g > 0.0) || !std::isfinite(setting.g)) {
    throw InvalidInputError("g-prior scale g must be positive and finite");
  }
}

}  // namespace

ModelStats model_stats(const Dataset& data, const OlsFit& fit) {
  ModelStats s;
  s.n = fit.n;
  s.k = fit.k;
  s.sst = fit.sst;
  s.r_squared = fit.r_squared;
  if (fit.k > 0) {
    const MatrixXd xg = select_columns(data.x_centered, fit.model.predictors());
    s.xtx = xg.transpose() * xg;
    s.xty = xg.transpose() * (data.y.array() - data.ybar()).matrix();
  }
  return s;
}

double log_bf_from_stats(const ModelStats& stats, const VectorXd& theta, double g) {
  if (stats.k == 0) return 0.0;
  if (!(stats.sst > 0.0)) {
    throw NumericError("log Bayes factor undefined: response has zero variance");
  }
  double theta_term = 0.0;
  if (theta.squaredNorm() > 0.0) {
    theta_term =
        (theta.dot(stats.xtx * theta) - 2.0 * theta.dot(stats.xty)) / stats.sst;
  }
  const double u = g * (1.0 - stats.r_squared) + theta_term;
  if (!(u > -1.0)) {
    throw NumericError(
        "marginal-likelihood bracket is non-positive (extreme prior mean)");
  }
  return 0.5 * (stats.n - stats.k - 1) * std::log1p(g) -
         0.5 * (stats.n - 1) * std::log1p(u);
}

double log_null_marginal(int n, double sst) {
  if (!(sst > 0.0)) {
    throw NumericError("marginal likelihood undefined: response has zero variance");
  }
  return std::lgamma(0.5 * (n - 1)) - 0.5 * (n - 1) * std::log(M_PI) -
         0.5 * std::log(static_cast<double>(n)) - 0.5 * (n - 1) * std::log(sst);
}

double log_null_marginal(const Dataset& data) {
  const double ybar = data.ybar();
  return log_null_marginal(static_cast<int>(data.n()),
                           (data.y.array() - ybar).matrix().squaredNorm());
}

double log_marginal(const OlsFit& fit, const GPriorSetting& setting, const Dataset& data) {
  const double c0 = log_null_marginal(fit.n, fit.sst);
  if (fit.k == 0) return c0;
  check_setting(fit, setting);
  return c0 + log_bf_from_stats(model_stats(data, fit), setting.theta, setting.g);
}

double log_bayes_factor_vs_null(const OlsFit& fit, const GPriorSetting& setting,
                                const Dataset& data) {
  if (fit.k == 0) return 0.0;
  check_setting(fit, setting);
  return log_bf_from_stats(model_stats(data, fit), setting.theta, setting.g);
}

VectorXd posterior_mean_beta(const OlsFit& fit, const GPriorSetting& setting) {
  check_setting(fit, setting);
  const double rho = setting.g / (1.0 + setting.g);
  return (1.0 - rho) * setting.theta + rho * fit.beta_ls;
}

EnsemblePosterior assemble_ensemble(const Dataset& data,
                                    const std::vector<ModelIndex>& models,
                                    const VectorXd& log_marginals,
                                    const std::vector<VectorXd>& coef_means,
                                    const ModelPrior& prior) {
  const auto m = static_cast<Eigen::Index>(models.size());
  if (log_marginals.size() != m || coef_means.size() != models.size()) {
    throw InvalidInputError("assemble_ensemble: mismatched per-model inputs");
  }

  VectorXd lp(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lp[i] = log_marginals[i] + log_model_prior(models[static_cast<std::size_t>(i)], prior);
  }
  const double lp_max = lp.maxCoeff();
  if (lp_max == kNegInf || std::isnan(lp_max)) {
    throw DegenerateEnsembleError("all model marginals vanished");
  }
  const double lse = lp_max + std::log((lp.array() - lp_max).exp().sum());

  EnsemblePosterior post;
  post.models = models;
  post.log_marginals = log_marginals;
  post.post_probs = (lp.array() - lse).exp();
  post.inclusion_probs = VectorXd::Zero(data.p());
  post.beta_bma = VectorXd::Zero(data.p());
  post.ybar_train = data.ybar();
  post.col_means = data.col_means;

  for (Eigen::Index i = 0; i < m; ++i) {
    const ModelIndex& model = models[static_cast<std::size_t>(i)];
    const VectorXd& coef = coef_means[static_cast<std::size_t>(i)];
    const auto preds = model.predictors();
    if (coef.size() != static_cast<Eigen::Index>(preds.size())) {
      throw InvalidInputError("assemble_ensemble: coefficient length mismatch");
    }
    for (std::size_t j = 0; j < preds.size(); ++j) {
      post.inclusion_probs[preds[j]] += post.post_probs[i];
      post.beta_bma[preds[j]] += coef[static_cast<Eigen::Index>(j)] * post.post_probs[i];
    }
  }
  return post;
}

EnsemblePosterior ensemble_posterior(const Dataset& data,
                                     const std::vector<GPriorSetting>& settings,
                                     const ModelPrior& prior) {
  std::vector<const GPriorSetting*> sorted;
  sorted.reserve(settings.size());
  for (const auto& s : settings) {
    if (s.model.is_null()) {
      throw InvalidInputError("ensemble_posterior: the null model needs no setting");
    }
    sorted.push_back(&s);
  }
  std::sort(sorted.begin(), sorted.end(), [](const GPriorSetting* a, const GPriorSetting* b) {
    return canonical_less(a->model, b->model);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->model == sorted[i - 1]->model) {
      throw InvalidInputError("ensemble_posterior: duplicate model setting");
    }
  }

  std::vector<ModelIndex> models;
  models.reserve(sorted.size() + 1);
  models.push_back(ModelIndex::null_model(static_cast<int>(data.p())));
  VectorXd log_marginals(static_cast<Eigen::Index>(sorted.size()) + 1);
  std::vector<VectorXd> coef_means;
  coef_means.reserve(sorted.size() + 1);

  log_marginals[0] = log_null_marginal(data);
  coef_means.emplace_back();

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const GPriorSetting& s = *sorted[i];
    const OlsFit fit = ols_fit(data, s.model);
    models.push_back(s.model);
    log_marginals[static_cast<Eigen::Index>(i) + 1] = log_marginal(fit, s, data);
    coef_means.push_back(posterior_mean_beta(fit, s));
  }
  return assemble_ensemble(data, models, log_marginals, coef_means, prior);
}

VectorXd predict_plane(double ybar, const VectorXd& col_means, const VectorXd& beta,
                       const MatrixXd& x_test_raw) {
  if (x_test_raw.cols() != col_means.size() || beta.size() != col_means.size()) {
    throw InvalidInputError("predict: test design has the wrong number of columns");
  }
  return (ybar + ((x_test_raw.rowwise() - col_means.transpose()) * beta).array())
      .matrix();
}

VectorXd predict(const EnsemblePosterior& post, const MatrixXd& x_test_raw) {
  return predict_plane(post.ybar_train, post.col_means, post.beta_bma, x_test_raw);
}

Dataset make_single_outlier_dataset(int n, double beta_true, double shift) {
  if (n < 3) throw InvalidInputError("make_single_outlier_dataset: need n >= 3");
  MatrixXd x(n, 1);
  VectorXd y(n);
  for (int i = 1; i <= n; ++i) {
    x(i - 1, 0) = i - 1 - 0.5 * (n - 1);
    y[i - 1] = beta_true * x(i - 1, 0);
  }
  y[n - 1] -= shift;
  return Dataset(std::move(y), std::move(x));
}

double expected_mspe_single_outlier(double s, double beta_true, double shift,
                                    double sigma2, const VectorXd& x_test,
                                    double beta_ls) {
  const double n = static_cast<double>(x_test.size());
  if (n < 1.0) throw InvalidInputError("expected_mspe_single_outlier: empty test design");
  const double gap = beta_true - s * beta_ls;
  const double sum_x = x_test.sum();
  const double sum_x2 = x_test.squaredNorm();
  return (gap * gap * sum_x2 + 2.0 * (shift / n) * gap * sum_x) / n +
         shift * shift / (n * n) + sigma2;
}

}  // namespace ebma
