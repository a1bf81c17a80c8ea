#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebma/methods.hpp"
#include "ebma/rng.hpp"

namespace ebma {

struct ContaminationScheme {
  enum class Kind { None, MeanShift, VarianceInflation };
  /// How the contaminated subset is chosen: a fixed count of floor(pi * n)
  /// cases drawn without replacement, or an independent Bernoulli(pi) draw
  /// per case.
  enum class Selection { FixedCount, Bernoulli };

  Kind kind = Kind::None;
  double k_value = 0.0;  // additive shift, or the error-variance factor
  double pi = 0.0;
  Selection selection = Selection::FixedCount;

  static ContaminationScheme none() { return {}; }
  static ContaminationScheme mean_shift(double k, double pi,
                                        Selection sel = Selection::FixedCount) {
    return {Kind::MeanShift, k, pi, sel};
  }
  static ContaminationScheme variance_inflation(double k, double pi,
                                                Selection sel = Selection::FixedCount) {
    return {Kind::VarianceInflation, k, pi, sel};
  }
};

struct SimConfig {
  int n_train = 100;
  int n_test = 100;
  int p = 5;
  double corr = 0.6;
  VectorXd beta_true;
  double sigma = 1.0;
  double alpha = 0.0;
  ContaminationScheme train_scheme;
  ContaminationScheme test_scheme;
  int n_reps = 100;
  std::uint64_t seed = 0;
  std::vector<Method> methods;
  Method reference_method = Method::HyperGN;
  MethodOptions method_options;

  /// Throws ConfigError listing every offending field.
  void validate() const;
};

/// Rows i.i.d. zero-mean multivariate normal with unit variances and a
/// common off-diagonal correlation.
MatrixXd gen_design(int n, int p, double corr, Rng& rng);

/// y_i = alpha + x_i' beta + eps_i, then the scheme contaminates a subset.
/// Returns the response and the mask of contaminated rows.
std::pair<VectorXd, std::vector<std::uint8_t>> gen_response(
    const MatrixXd& x, const VectorXd& beta_true, double alpha, double sigma,
    const ContaminationScheme& scheme, Rng& rng);

struct MethodSummary {
  std::string method;
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0, mean = 0.0;
};

struct SimReport {
  std::vector<Method> methods;
  MatrixXd mspe;  // reps x methods; NaN marks a failed cell
  MatrixXd rr;    // percent reduction vs the reference method
  std::vector<MethodSummary> mspe_summary;
  std::vector<MethodSummary> rr_summary;
};

/// Run every replication of the study. Per-replication generator streams
/// derive from (seed, rep), so results are identical for any thread count.
SimReport run_simulation(const SimConfig& config, int threads = 1);

/// Prediction plane from the trimmed full-model fit; the non-averaging
/// comparator.
FittedModel robust_full_model_predictor(const Dataset& data, double trim_frac);

/// One row per rep x method: rep,method,mspe,rr.
std::string sim_rows_csv(const SimReport& report, const std::string& header_comment);
/// Quantile summary per method and metric.
std::string sim_summary_csv(const SimReport& report, const std::string& header_comment);

/// Type-7 quantile of the finite values (NaNs skipped).
double quantile(std::vector<double> values, double q);

}  // namespace ebma
