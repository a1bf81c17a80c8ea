#include "ebma/methods.hpp"

#include <cmath>

#include "ebma/errors.hpp"
#include "ebma/strategies.hpp"

namespace ebma {

namespace {

FittedModel plane_from_posterior(const EnsemblePosterior& post) {
  return {post.ybar_train, post.col_means, post.beta_bma};
}

std::vector<HyperparamRecord> records_from_settings(
    const std::vector<GPriorSetting>& settings) {
  std::vector<HyperparamRecord> records;
  records.reserve(settings.size());
  for (const auto& s : settings) {
    HyperparamRecord rec;
    rec.model = s.model;
    rec.g = s.g;
    rec.rho = s.g / (1.0 + s.g);
    if (s.theta.squaredNorm() > 0.0) rec.theta = s.theta;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

Method method_from_tag(const std::string& tag) {
  if (tag == "fixed-g") return Method::FixedG;
  if (tag == "eb-local") return Method::EBLocal;
  if (tag == "eb-global") return Method::EBGlobal;
  if (tag == "hyper-gn") return Method::HyperGN;
  if (tag == "null-mixture") return Method::NullMixture;
  if (tag == "robust-full") return Method::RobustFull;
  throw InvalidInputError("unknown method tag '" + tag + "'");
}

std::string method_tag(Method method) {
  switch (method) {
    case Method::FixedG: return "fixed-g";
    case Method::EBLocal: return "eb-local";
    case Method::EBGlobal: return "eb-global";
    case Method::HyperGN: return "hyper-gn";
    case Method::NullMixture: return "null-mixture";
    case Method::RobustFull: return "robust-full";
  }
  throw InvalidInputError("unknown method");
}

MethodFit fit_method(const Dataset& data, Method method, const MethodOptions& opts) {
  const int p = static_cast<int>(data.p());
  const int n = static_cast<int>(data.n());
  MethodFit out;

  if (method == Method::RobustFull) {
    const ModelIndex full = ModelIndex::full_model(p);
    // the whole plane, intercept included, comes from the trimmed fit
    const Dataset trimmed = data.subset(trimmed_rows(data, full, opts.trim_frac));
    out.plane = {trimmed.ybar(), trimmed.col_means, ols_fit(trimmed, full).beta_ls};
    return out;
  }

  const ModelPrior prior{opts.prior_kind, p, opts.k_max};
  const std::vector<ModelIndex> models = enumerate_models(p, opts.k_max);

  switch (method) {
    case Method::FixedG: {
      const auto settings = fixed_g_settings(models, n, opts.fixed_g);
      out.posterior = ensemble_posterior(data, settings, prior);
      out.hyperparams = records_from_settings(settings);
      break;
    }
    case Method::EBLocal: {
      std::vector<GPriorSetting> settings;
      for (const auto& m : models) {
        if (m.is_null()) continue;
        const double g = eb_local_g(ols_fit(data, m));
        settings.push_back(GPriorSetting::zero_mean(m, g, GStrategy::EBLocal));
      }
      out.posterior = ensemble_posterior(data, settings, prior);
      out.hyperparams = records_from_settings(settings);
      break;
    }
    case Method::EBGlobal: {
      const EbGlobalResult res = eb_global_g(data, models, prior);
      out.warning = res.multimodal_warning;
      std::vector<GPriorSetting> settings;
      for (const auto& m : models) {
        if (m.is_null()) continue;
        settings.push_back(GPriorSetting::zero_mean(m, res.g, GStrategy::EBGlobal));
      }
      out.posterior = ensemble_posterior(data, settings, prior);
      out.hyperparams = records_from_settings(settings);
      break;
    }
    case Method::HyperGN: {
      std::vector<ModelIndex> all = models;
      VectorXd log_marginals(static_cast<Eigen::Index>(all.size()));
      std::vector<VectorXd> coef_means(all.size());
      for (std::size_t i = 0; i < all.size(); ++i) {
        const OlsFit fit = ols_fit(data, all[i]);
        const HyperGnResult q = hyper_gn_quantities(fit, opts.hyper_a);
        log_marginals[static_cast<Eigen::Index>(i)] = q.log_marginal;
        coef_means[i] = q.expected_shrinkage * fit.beta_ls;
        if (!all[i].is_null()) {
          HyperparamRecord rec;
          rec.model = all[i];
          rec.rho = q.expected_shrinkage;
          out.hyperparams.push_back(std::move(rec));
        }
      }
      out.posterior = assemble_ensemble(data, all, log_marginals, coef_means, prior);
      break;
    }
    case Method::NullMixture: {
      NullMixtureEnsemble ens =
          fit_null_mixture_ensemble(data, models, prior, opts.trim_frac);
      out.warning = ens.convergence_warnings > 0;
      for (const auto& f : ens.fits) {
        HyperparamRecord rec;
        rec.model = f.model;
        rec.g = f.g_hat;
        rec.rho = f.g_hat / (1.0 + f.g_hat);
        rec.theta = f.theta_hat;
        rec.objective = f.objective;
        rec.converged = f.converged;
        out.hyperparams.push_back(std::move(rec));
      }
      out.posterior = std::move(ens.posterior);
      break;
    }
    default:
      throw InvalidInputError("fit_method: unhandled method");
  }

  out.plane = plane_from_posterior(*out.posterior);
  return out;
}

}  // namespace ebma
