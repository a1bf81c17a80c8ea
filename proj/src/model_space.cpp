#include "ebma/model_space.hpp"

#include <algorithm>
#include <cmath>

#include "ebma/errors.hpp"

namespace ebma {

namespace {

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Value of the bit string read with predictor 1 as the most significant
// digit; lexicographic order on the string equals numeric order on this.
std::uint32_t lex_value(const ModelIndex& m) {
  std::uint32_t v = 0;
  for (int j = 0; j < m.p; ++j) {
    v = (v << 1) | (m.contains(j) ? 1u : 0u);
  }
  return v;
}

}  // namespace

std::vector<int> ModelIndex::predictors() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int j = 0; j < p; ++j) {
    if (contains(j)) out.push_back(j);
  }
  return out;
}

std::string ModelIndex::bitstring() const {
  std::string s(static_cast<std::size_t>(p), '0');
  for (int j = 0; j < p; ++j) {
    if (contains(j)) s[static_cast<std::size_t>(j)] = '1';
  }
  return s;
}

ModelIndex ModelIndex::from_bitstring(const std::string& s) {
  ModelIndex m{0u, static_cast<int>(s.size())};
  if (m.p == 0 || m.p > 20) throw InvalidInputError("model bit string length out of range");
  for (int j = 0; j < m.p; ++j) {
    const char c = s[static_cast<std::size_t>(j)];
    if (c == '1') {
      m.bits |= 1u << j;
    } else if (c != '0') {
      throw InvalidInputError("model bit string may contain only '0' and '1'");
    }
  }
  return m;
}

bool canonical_less(const ModelIndex& a, const ModelIndex& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return lex_value(a) < lex_value(b);
}

ModelPrior::Kind prior_kind_from_tag(const std::string& tag) {
  if (tag == "uniform") return ModelPrior::Kind::Uniform;
  if (tag == "betabinomial") return ModelPrior::Kind::BetaBinomial11;
  throw InvalidInputError("unknown model prior '" + tag + "'");
}

std::string prior_tag(ModelPrior::Kind kind) {
  return kind == ModelPrior::Kind::Uniform ? "uniform" : "betabinomial";
}

std::vector<ModelIndex> enumerate_models(int p, std::optional<int> k_max) {
  if (p < 1) throw InvalidInputError("enumerate_models: need p >= 1");
  if (p > 20) throw CapacityError("enumerate_models: enumeration capped at p = 20");
  if (k_max && (*k_max < 0 || *k_max > p)) {
    throw InvalidInputError("enumerate_models: k_max out of range");
  }
  const int cap = k_max.value_or(p);
  std::vector<ModelIndex> models;
  models.reserve(1u << p);
  for (std::uint32_t bits = 0; bits < (1u << p); ++bits) {
    if (std::popcount(bits) <= cap) models.push_back({bits, p});
  }
  std::sort(models.begin(), models.end(), canonical_less);
  return models;
}

double log_model_prior(const ModelIndex& model, const ModelPrior& prior) {
  if (model.p != prior.p) {
    throw InvalidInputError("log_model_prior: model length does not match prior");
  }
  const int p = prior.p;
  const int k = model.size();
  if (prior.k_max && k > *prior.k_max) {
    throw InvalidInputError("log_model_prior: model exceeds the prior's k_max");
  }

  double raw;
  double log_total = 0.0;
  if (prior.kind == ModelPrior::Kind::Uniform) {
    raw = -p * std::log(2.0);
    if (prior.k_max && *prior.k_max < p) {
      double mass = 0.0;
      for (int j = 0; j <= *prior.k_max; ++j) {
        mass += std::exp(log_choose(p, j) - p * std::log(2.0));
      }
      log_total = std::log(mass);
    }
  } else {
    raw = -std::log(p + 1.0) - log_choose(p, k);
    if (prior.k_max && *prior.k_max < p) {
      // each size carries mass 1/(p+1)
      log_total = std::log((*prior.k_max + 1.0) / (p + 1.0));
    }
  }
  return raw - log_total;
}

}  // namespace ebma
