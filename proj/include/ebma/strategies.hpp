#pragma once

#include <optional>
#include <vector>

#include "ebma/gprior.hpp"

namespace ebma {

/// g values are clamped to this range everywhere so the marginal formulas
/// stay finite in floating point.
inline constexpr double kGMin = 1e-8;
inline constexpr double kGMax = 1e12;

inline double clamp_g(double g) {
  return g < kGMin ? kGMin : (g > kGMax ? kGMax : g);
}

struct StrategyConfig {
  enum class Kind { FixedG, EBLocal, EBGlobal, HyperGN };
  Kind kind = Kind::FixedG;
  std::optional<double> fixed_g;  // default n (unit information)
  double hyper_a = 3.0;
};

/// Zero-mean settings with a common g for every non-null model; the
/// default g = n is the unit-information choice.
std::vector<GPriorSetting> fixed_g_settings(const std::vector<ModelIndex>& models,
                                            int n, std::optional<double> g = {});

/// Model-specific empirical Bayes scale: the argmax over g >= 0 of the
/// zero-mean marginal likelihood, in closed form
///   g* = max{ ((n-1) R^2 - k) / ((1 - R^2) k), 0 },
/// clamped away from zero. R^2 = 1 makes the marginal unbounded.
double eb_local_g(const OlsFit& fit);

struct EbGlobalResult {
  double g = 1.0;
  /// Set when the model-averaged marginal shows more than one local
  /// maximum over the search bracket; g still holds the best value found.
  bool multimodal_warning = false;
};

/// Shared empirical Bayes scale: maximizes sum_m m(Y|M,g) pi(M) with
/// theta = 0 by golden-section search on log g over [-10, 25].
EbGlobalResult eb_global_g(const Dataset& data, const std::vector<ModelIndex>& models,
                           const ModelPrior& prior);

/// Heavy-tailed prior on g scaled by n: density (a-2)/(2n) (1+g/n)^(-a/2).
double hyper_gn_log_density(double g, int n, double a);

struct HyperGnResult {
  double log_marginal = 0.0;
  double expected_shrinkage = 0.0;  // E[g/(1+g) | Y, M], 0 for the null model
};

/// Marginal likelihood and posterior expected shrinkage under the
/// heavy-tailed g prior, via adaptive quadrature after the substitution
/// u = g/(n+g). The null model returns the g-free marginal.
HyperGnResult hyper_gn_quantities(const OlsFit& fit, double a = 3.0);

}  // namespace ebma
