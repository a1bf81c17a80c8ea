#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ebma {

/// Candidate-predictor subset, identified by a bit per predictor.
/// Bit j (0-based) set means column j of the design is in the model.
struct ModelIndex {
  std::uint32_t bits = 0;
  int p = 0;

  int size() const { return std::popcount(bits); }
  bool is_null() const { return bits == 0; }
  bool contains(int j) const { return (bits >> j) & 1u; }

  std::vector<int> predictors() const;

  /// Bit string with predictor 1 first, e.g. "101" = predictors {1, 3}.
  std::string bitstring() const;
  static ModelIndex from_bitstring(const std::string& s);

  static ModelIndex null_model(int p) { return {0u, p}; }
  static ModelIndex full_model(int p) {
    return {p >= 32 ? ~0u : ((1u << p) - 1u), p};
  }

  friend bool operator==(const ModelIndex& a, const ModelIndex& b) {
    return a.bits == b.bits && a.p == b.p;
  }
};

/// Canonical enumeration order: by model size, then lexicographically on
/// the bit string. Keeps every downstream report byte-reproducible.
bool canonical_less(const ModelIndex& a, const ModelIndex& b);

struct ModelPrior {
  enum class Kind { Uniform, BetaBinomial11 };
  Kind kind = Kind::BetaBinomial11;
  int p = 0;
  /// When set, the prior is renormalized over the size-truncated space so
  /// posterior probabilities still sum to one over the averaged set.
  std::optional<int> k_max;
};

ModelPrior::Kind prior_kind_from_tag(const std::string& tag);
std::string prior_tag(ModelPrior::Kind kind);

/// All models with at most k_max predictors (all 2^p when unset), in
/// canonical order. Enumeration is deliberately capped at p = 20.
std::vector<ModelIndex> enumerate_models(int p, std::optional<int> k_max = {});

double log_model_prior(const ModelIndex& model, const ModelPrior& prior);

}  // namespace ebma
