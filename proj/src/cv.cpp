#include "ebma/cv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "ebma/errors.hpp"

namespace ebma {

FoldPartition kfold_partition(int n, int K, Rng& rng) {
  if (K < 2 || K > n) throw InvalidInputError("kfold_partition: need 2 <= K <= n");
  FoldPartition part;
  part.K = K;
  part.assignments.assign(static_cast<std::size_t>(n), 0);
  if (K == n) {
    // leave-one-out: singletons form the single possible partition, so no
    // randomness enters and the labeling is canonical
    for (int i = 0; i < n; ++i) part.assignments[static_cast<std::size_t>(i)] = i + 1;
    return part;
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  for (int i = 0; i < n; ++i) {
    part.assignments[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        i % K + 1;
  }
  return part;
}

double cve(const Dataset& data, const Fitter& fit, const FoldPartition& partition,
           int threads) {
  const int n = static_cast<int>(data.n());
  if (static_cast<int>(partition.assignments.size()) != n) {
    throw InvalidInputError("cve: partition size does not match data");
  }

  std::vector<double> fold_sq(static_cast<std::size_t>(partition.K), 0.0);
  std::vector<std::string> fold_err(static_cast<std::size_t>(partition.K));

  auto run_fold = [&](int fold) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < n; ++i) {
      if (partition.assignments[static_cast<std::size_t>(i)] == fold + 1) {
        test_rows.push_back(i);
      } else {
        train_rows.push_back(i);
      }
    }
    if (test_rows.empty()) return;
    try {
      const Dataset train = data.subset(train_rows);
      const FittedModel model = fit(train);
      MatrixXd x_test(static_cast<Eigen::Index>(test_rows.size()), data.p());
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        x_test.row(static_cast<Eigen::Index>(i)) = data.x_raw.row(test_rows[i]);
      }
      const VectorXd pred = model.predict(x_test);
      double sq = 0.0;
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        const double d = pred[static_cast<Eigen::Index>(i)] - data.y[test_rows[i]];
        sq += d * d;
      }
      fold_sq[static_cast<std::size_t>(fold)] = sq;
    } catch (const std::exception& e) {
      fold_err[static_cast<std::size_t>(fold)] =
          "cve: fold " + std::to_string(fold + 1) + " failed: " + e.what();
    }
  };

  const int n_threads = std::max(1, std::min(threads, partition.K));
  if (n_threads == 1) {
    for (int fold = 0; fold < partition.K; ++fold) run_fold(fold);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (int f = next.fetch_add(1); f < partition.K; f = next.fetch_add(1)) {
          run_fold(f);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& err : fold_err) {
    if (!err.empty()) throw Error(err);
  }
  double total = 0.0;
  for (double sq : fold_sq) total += sq;
  return total / n;
}

double cve(const Dataset& data, Method method, const MethodOptions& opts,
           const FoldPartition& partition, int threads) {
  return cve(
      data,
      [method, &opts](const Dataset& train) { return fit_method(train, method, opts).plane; },
      partition, threads);
}

std::vector<FoldPartition> draw_partitions(int n, int K, int T, Rng& rng) {
  if (T < 1) throw InvalidInputError("draw_partitions: need T >= 1");
  if (K == n) T = 1;  // leave-one-out has a single partition
  std::vector<FoldPartition> parts;
  parts.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) parts.push_back(kfold_partition(n, K, rng));
  return parts;
}

double ecve_estimate(const Dataset& data, const Fitter& fit, int K, int T, Rng& rng,
                     int threads) {
  const auto parts = draw_partitions(static_cast<int>(data.n()), K, T, rng);
  double total = 0.0;
  for (const auto& part : parts) total += cve(data, fit, part, threads);
  return total / static_cast<double>(parts.size());
}

double ecve_estimate(const Dataset& data, Method method, const MethodOptions& opts,
                     int K, int T, Rng& rng, int threads) {
  return ecve_estimate(
      data,
      [method, &opts](const Dataset& train) { return fit_method(train, method, opts).plane; },
      K, T, rng, threads);
}

}  // namespace ebma
