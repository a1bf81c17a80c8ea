#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ebma/gprior.hpp"
#include "ebma/null_mixture.hpp"

namespace ebma {

enum class Method { FixedG, EBLocal, EBGlobal, HyperGN, NullMixture, RobustFull };

Method method_from_tag(const std::string& tag);
std::string method_tag(Method method);

struct MethodOptions {
  ModelPrior::Kind prior_kind = ModelPrior::Kind::BetaBinomial11;
  std::optional<int> k_max;
  double trim_frac = 0.10;
  std::optional<double> fixed_g;  // fixed-g only; default n
  double hyper_a = 3.0;
};

/// A fitted prediction plane: everything needed to score new cases.
struct FittedModel {
  double ybar_train = 0.0;
  VectorXd col_means;
  VectorXd beta;  // length p

  VectorXd predict(const MatrixXd& x_test_raw) const {
    return predict_plane(ybar_train, col_means, beta, x_test_raw);
  }
};

/// Per-model hyperparameter record for reporting.
struct HyperparamRecord {
  ModelIndex model;
  std::optional<double> g;
  std::optional<double> rho;  // g/(1+g), or the expected shrinkage
  VectorXd theta;             // empty for zero-mean strategies
  std::optional<double> objective;
  bool converged = true;
};

struct MethodFit {
  FittedModel plane;
  std::optional<EnsemblePosterior> posterior;  // absent for robust-full
  std::vector<HyperparamRecord> hyperparams;   // non-null models, canonical order
  bool warning = false;
};

MethodFit fit_method(const Dataset& data, Method method, const MethodOptions& opts);

}  // namespace ebma
