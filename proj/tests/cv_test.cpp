#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ebma/cv.hpp"
#include "ebma/errors.hpp"
#include "ebma/simulation.hpp"
#include "test_util.hpp"

using namespace ebma;

namespace {

Fitter constant_mean_fitter() {
  return [](const Dataset& train) {
    FittedModel fm;
    fm.ybar_train = train.ybar();
    fm.col_means = train.col_means;
    fm.beta = VectorXd::Zero(train.p());
    return fm;
  };
}

}  // namespace

TEST_CASE("kfold_partition shapes") {
  Rng rng(1);
  const FoldPartition loo = kfold_partition(51, 51, rng);
  std::vector<int> counts(52, 0);
  for (int a : loo.assignments) ++counts[static_cast<std::size_t>(a)];
  for (int f = 1; f <= 51; ++f) CHECK(counts[static_cast<std::size_t>(f)] == 1);

  const FoldPartition five = kfold_partition(10, 5, rng);
  std::vector<int> c2(6, 0);
  for (int a : five.assignments) ++c2[static_cast<std::size_t>(a)];
  for (int f = 1; f <= 5; ++f) CHECK(c2[static_cast<std::size_t>(f)] == 2);

  Rng a(42), b(42);
  const FoldPartition p1 = kfold_partition(23, 4, a);
  const FoldPartition p2 = kfold_partition(23, 4, b);
  CHECK(p1.assignments == p2.assignments);

  CHECK_THROWS_AS(kfold_partition(10, 1, rng), InvalidInputError);
  CHECK_THROWS_AS(kfold_partition(10, 11, rng), InvalidInputError);
}

TEST_CASE("cve of the constant-mean method on constant response is zero") {
  MatrixXd x(9, 2);
  Rng rng(3);
  for (int i = 0; i < 9; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
  }
  const Dataset data(VectorXd::Constant(9, 4.2), x);
  Rng prng(5);
  const FoldPartition part = kfold_partition(9, 3, prng);
  CHECK(cve(data, constant_mean_fitter(), part) == doctest::Approx(0.0));
}

TEST_CASE("leave-one-out cve equals the direct mean of squared errors") {
  Rng rng(17);
  VectorXd beta(2);
  beta << 1.0, -0.5;
  const Dataset data = testutil::random_dataset(20, 2, beta, 0.3, 1.0, rng);
  const int n = static_cast<int>(data.n());
  MethodOptions opts;

  Rng prng(99);
  const FoldPartition loo = kfold_partition(n, n, prng);
  const double via_cve = cve(data, Method::FixedG, opts, loo);

  double direct = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> rows;
    for (int s = 0; s < n; ++s) {
      if (s != i) rows.push_back(s);
    }
    const Dataset train = data.subset(rows);
    const FittedModel fm = fit_method(train, Method::FixedG, opts).plane;
    const double pred = fm.predict(data.x_raw.row(i))[0];
    direct += (pred - data.y[i]) * (pred - data.y[i]);
  }
  direct /= n;
  CHECK(std::abs(via_cve - direct) < 1e-12 * std::max(1.0, direct));
}

TEST_CASE("cve is invariant to fold relabeling") {
  Rng rng(21);
  VectorXd beta(1);
  beta << 0.7;
  const Dataset data = testutil::random_dataset(18, 1, beta, 0.0, 1.0, rng);
  Rng prng(4);
  FoldPartition part = kfold_partition(18, 3, prng);
  const double base = cve(data, Method::FixedG, MethodOptions{}, part);

  FoldPartition relabeled = part;
  const std::vector<int> perm = {0, 3, 1, 2};  // folds 1,2,3 -> 3,1,2
  for (auto& a : relabeled.assignments) a = perm[static_cast<std::size_t>(a)];
  const double swapped = cve(data, Method::FixedG, MethodOptions{}, relabeled);
  CHECK(base == doctest::Approx(swapped).epsilon(1e-15));
}

TEST_CASE("cve is deterministic across thread counts") {
  Rng rng(23);
  VectorXd beta(2);
  beta << 0.4, -0.9;
  const Dataset data = testutil::random_dataset(30, 2, beta, 0.1, 1.0, rng);
  Rng prng(6);
  const FoldPartition part = kfold_partition(30, 6, prng);
  const double serial = cve(data, Method::EBLocal, MethodOptions{}, part, 1);
  const double threaded = cve(data, Method::EBLocal, MethodOptions{}, part, 4);
  CHECK(serial == threaded);
}

TEST_CASE("cve errors name the failing fold") {
  MatrixXd x(8, 1);
  x << 1, 1, 1, 1, 2, 3, 4, 5;
  VectorXd y(8);
  y << 1, 2, 3, 4, 5, 6, 7, 8;
  const Dataset data(y, x);
  // fold 2 holds every non-constant row: training on the rest is singular
  FoldPartition part;
  part.K = 2;
  part.assignments = {1, 1, 1, 1, 2, 2, 2, 2};
  try {
    cve(data, Method::FixedG, MethodOptions{}, part);
    FAIL("expected an error naming the fold");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fold 2") != std::string::npos);
  }
}

TEST_CASE("the tuned mixture beats fixed-g under heavy contamination") {
  // 10% of responses shifted by 10; seeded instance
  Rng rng(424242);
  const MatrixXd x = gen_design(50, 3, 0.0, rng);
  VectorXd beta(3);
  beta << 1.0, 0.0, 0.0;
  auto [y, mask] =
      gen_response(x, beta, 0.0, 1.0, ContaminationScheme::mean_shift(10.0, 0.10), rng);
  const Dataset data(y, x);

  Rng prng(7);
  const FoldPartition part = kfold_partition(50, 5, prng);
  const double nm = cve(data, Method::NullMixture, MethodOptions{}, part);
  const double fixed = cve(data, Method::FixedG, MethodOptions{}, part);
  CHECK(nm < fixed);
}

TEST_CASE("ecve_estimate identities") {
  Rng rng(31);
  VectorXd beta(1);
  beta << 1.1;
  const Dataset data = testutil::random_dataset(16, 1, beta, 0.2, 1.0, rng);
  const int n = static_cast<int>(data.n());

  // K = n: partition-free, any T
  Rng r1(100), r2(200), r3(300);
  const double a = ecve_estimate(data, Method::FixedG, MethodOptions{}, n, 1, r1);
  const double b = ecve_estimate(data, Method::FixedG, MethodOptions{}, n, 7, r2);
  CHECK(a == b);
  Rng loo_rng(1);
  const double direct = cve(data, Method::FixedG, MethodOptions{}, kfold_partition(n, n, loo_rng));
  CHECK(a == doctest::Approx(direct).epsilon(1e-15));

  // T = 1 equals a single draw with the same generator state
  Rng r4(17), r5(17);
  const double t1 = ecve_estimate(data, Method::FixedG, MethodOptions{}, 4, 1, r4);
  const double single = cve(data, Method::FixedG, MethodOptions{}, kfold_partition(n, 4, r5));
  CHECK(t1 == doctest::Approx(single).epsilon(1e-15));

  // seeded runs reproduce bit for bit
  Rng r6(77), r7(77);
  CHECK(ecve_estimate(data, Method::FixedG, MethodOptions{}, 4, 5, r6) ==
        ecve_estimate(data, Method::FixedG, MethodOptions{}, 4, 5, r7));
}

TEST_CASE("ecve_estimate stabilizes over repeated partitions") {
  Rng rng(35);
  VectorXd beta(2);
  beta << 0.8, 0.0;
  const Dataset data = testutil::random_dataset(40, 2, beta, 0.1, 1.0, rng);

  auto batch = [&](std::uint64_t seed) {
    Rng prng(seed);
    std::vector<double> values;
    for (int t = 0; t < 50; ++t) {
      values.push_back(
          cve(data, Method::FixedG, MethodOptions{}, kfold_partition(40, 5, prng)));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    return std::pair<double, double>(mean, var / static_cast<double>(values.size()));
  };
  const auto [m1, se2_1] = batch(1001);
  const auto [m2, se2_2] = batch(2002);
  CHECK(std::abs(m1 - m2) <= 3.0 * std::sqrt(se2_1 + se2_2));
}
