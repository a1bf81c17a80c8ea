#include "ebma/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ebma/errors.hpp"
#include "ebma/quadrature.hpp"

namespace ebma {

namespace {

// Zero-mean log marginal as a function of g, with per-model constants
// precomputed once.
struct ZeroMeanMarginal {
  double c0;  // null-model marginal
  double n, k, one_minus_r2;

  explicit ZeroMeanMarginal(const OlsFit& fit)
      : c0(log_null_marginal(fit.n, fit.sst)),
        n(fit.n),
        k(fit.k),
        one_minus_r2(1.0 - fit.r_squared) {}

  double operator()(double g) const {
    return c0 + 0.5 * (n - k - 1) * std::log1p(g) -
           0.5 * (n - 1) * std::log1p(g * one_minus_r2);
  }
};

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double x_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<GPriorSetting> fixed_g_settings(const std::vector<ModelIndex>& models,
                                            int n, std::optional<double> g) {
  if (n < 2) throw InvalidInputError("fixed_g_settings: need n >= 2");
  const double value = clamp_g(g.value_or(static_cast<double>(n)));
  if (!(value > 0.0)) throw InvalidInputError("fixed_g_settings: g must be positive");
  std::vector<GPriorSetting> settings;
  settings.reserve(models.size());
  for (const auto& m : models) {
    if (m.is_null()) continue;
    settings.push_back(GPriorSetting::zero_mean(m, value, GStrategy::FixedG));
  }
  return settings;
}

double eb_local_g(const OlsFit& fit) {
  if (fit.k < 1) throw InvalidInputError("eb_local_g: null model has no g");
  const double r2 = fit.r_squared;
  if (!(r2 < 1.0)) {
    throw NumericError("eb_local_g: R^2 = 1 makes the marginal unbounded");
  }
  const double g_star = ((fit.n - 1) * r2 - fit.k) / ((1.0 - r2) * fit.k);
  return clamp_g(std::max(g_star, 0.0));
}

EbGlobalResult eb_global_g(const Dataset& data, const std::vector<ModelIndex>& models,
                           const ModelPrior& prior) {
  std::vector<ZeroMeanMarginal> marginals;
  std::vector<double> log_priors;
  marginals.reserve(models.size());
  double null_lp = 0.0;
  bool have_null = false;
  for (const auto& m : models) {
    if (m.is_null()) {
      null_lp = log_null_marginal(data) + log_model_prior(m, prior);
      have_null = true;
      continue;
    }
    marginals.emplace_back(ols_fit(data, m));
    log_priors.push_back(log_model_prior(m, prior));
  }
  if (marginals.empty()) {
    throw InvalidInputError("eb_global_g: no non-null models to average");
  }

  auto objective = [&](double log_g) {
    const double g = std::exp(log_g);
    double lp_max = have_null ? null_lp : -std::numeric_limits<double>::infinity();
    std::vector<double> lps;
    lps.reserve(marginals.size());
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      lps.push_back(marginals[i](g) + log_priors[i]);
      lp_max = std::max(lp_max, lps.back());
    }
    double sum = have_null ? std::exp(null_lp - lp_max) : 0.0;
    for (double lp : lps) sum += std::exp(lp - lp_max);
    return lp_max + std::log(sum);
  };

  const double lo = -10.0, hi = 25.0;
  const int grid_n = 141;
  std::vector<double> xs(grid_n), fs(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    xs[i] = lo + (hi - lo) * i / (grid_n - 1);
    fs[i] = objective(xs[i]);
  }

  // Brackets around every grid local maximum; more than one means the
  // averaged marginal is not unimodal over the search range.
  std::vector<std::pair<double, double>> brackets;
  int interior_maxima = 0;
  for (int i = 1; i + 1 < grid_n; ++i) {
    if (fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1] &&
        (fs[i] > fs[i - 1] || fs[i] > fs[i + 1])) {
      brackets.emplace_back(xs[i - 1], xs[i + 1]);
      ++interior_maxima;
    }
  }
  if (fs[0] > fs[1]) brackets.emplace_back(xs[0], xs[1]);
  if (fs[grid_n - 1] > fs[grid_n - 2]) brackets.emplace_back(xs[grid_n - 2], xs[grid_n - 1]);
  if (brackets.empty()) brackets.emplace_back(lo, hi);

  double best_x = xs[0], best_f = -std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : brackets) {
    const double x = golden_max(objective, a, b, 1e-6);
    const double fx = objective(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
    }
  }

  EbGlobalResult result;
  result.g = clamp_g(std::exp(best_x));
  result.multimodal_warning = interior_maxima > 1;
  return result;
}

double hyper_gn_log_density(double g, int n, double a) {
  if (!(a > 2.0)) throw InvalidInputError("hyper_gn: need a > 2");
  if (!(g >= 0.0)) throw InvalidInputError("hyper_gn: g must be nonnegative");
  return std::log(a - 2.0) - std::log(2.0 * n) - 0.5 * a * std::log1p(g / n);
}

HyperGnResult hyper_gn_quantities(const OlsFit& fit, double a) {
  if (!(a > 2.0)) throw InvalidInputError("hyper_gn: need a > 2");
  if (fit.k == 0) {
    return {log_null_marginal(fit.n, fit.sst), 0.0};
  }
  if (!(fit.r_squared < 1.0)) {
    throw NumericError("hyper_gn: R^2 = 1 makes the marginal integral diverge");
  }

  const ZeroMeanMarginal logm(fit);
  const double n = static_cast<double>(fit.n);

  // Scale by the largest marginal over g so the integrand peaks near one.
  const double g_peak = [&] {
    const double r2 = fit.r_squared;
    const double g_star = ((fit.n - 1) * r2 - fit.k) / ((1.0 - r2) * fit.k);
    return std::max(g_star, 0.0);
  }();
  const double shift = logm(g_peak);

  // u = g/(n+g): g = n u/(1-u), and the prior contributes the factor
  // ((a-2)/2) (1-u)^(a/2-2) du.
  auto g_of_u = [&](double u) { return n * u / (1.0 - u); };
  auto weight = [&](double u) {
    return 0.5 * (a - 2.0) * std::pow(1.0 - u, 0.5 * a - 2.0);
  };
  auto f_marg = [&](double u) {
    return std::exp(logm(g_of_u(u)) - shift) * weight(u);
  };
  auto f_shrink = [&](double u) {
    const double g = g_of_u(u);
    return (g / (1.0 + g)) * std::exp(logm(g) - shift) * weight(u);
  };

  const QuadratureOptions opts{1e-9, 0.0, 20};
  const double hi = 1.0 - 1e-12;
  double i_marg, i_shrink;
  try {
    i_marg = integrate(f_marg, 0.0, hi, opts);
    i_shrink = integrate(f_shrink, 0.0, hi, opts);
  } catch (const NumericError&) {
    throw NumericError("hyper_gn: quadrature did not converge");
  }
  if (!(i_marg > 0.0) || !std::isfinite(i_marg)) {
    throw NumericError("hyper_gn: marginal integral is not positive and finite");
  }

  HyperGnResult result;
  result.log_marginal = shift + std::log(i_marg);
  result.expected_shrinkage = i_shrink / i_marg;
  return result;
}

}  // namespace ebma
