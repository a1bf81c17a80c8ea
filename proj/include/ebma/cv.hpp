#pragma once

#include <functional>
#include <vector>

#include "ebma/methods.hpp"
#include "ebma/rng.hpp"

namespace ebma {

/// Balanced random partition: assignments[i] is the fold of case i,
/// numbered 1..K; fold sizes differ by at most one.
struct FoldPartition {
  std::vector<int> assignments;
  int K = 0;
};

FoldPartition kfold_partition(int n, int K, Rng& rng);

using Fitter = std::function<FittedModel(const Dataset&)>;

/// (1/n) sum_i (y_i - fhat^{-fold(i)}(x_i))^2. Each fold's model is
/// trained on the remaining folds with fresh centering of the split.
double cve(const Dataset& data, const Fitter& fit, const FoldPartition& partition,
           int threads = 1);
double cve(const Dataset& data, Method method, const MethodOptions& opts,
           const FoldPartition& partition, int threads = 1);

std::vector<FoldPartition> draw_partitions(int n, int K, int T, Rng& rng);

/// Average CVE over T independent random partitions; with K = n there is
/// only one partition and T collapses to 1.
double ecve_estimate(const Dataset& data, const Fitter& fit, int K, int T, Rng& rng,
                     int threads = 1);
double ecve_estimate(const Dataset& data, Method method, const MethodOptions& opts,
                     int K, int T, Rng& rng, int threads = 1);

}  // namespace ebma
