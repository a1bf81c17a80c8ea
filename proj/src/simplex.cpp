#include "ebma/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ebma {

namespace {

bool small_spread(double f_lo, double f_hi, const SimplexOptions& opts) {
  return (f_hi - f_lo) <= opts.f_tol_abs + opts.f_tol_rel * std::abs(f_lo);
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, const SimplexOptions& opts) {
  const int dim = static_cast<int>(x0.size());
  const int m = dim + 1;

  std::vector<Eigen::VectorXd> xs(m, x0);
  std::vector<double> fs(m);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  for (int i = 1; i < m; ++i) {
    const int j = i - 1;
    xs[i][j] += opts.initial_step * std::max(1.0, std::abs(x0[j]));
  }
  for (int i = 0; i < m; ++i) fs[i] = eval(xs[i]);

  std::vector<int> order(m);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[a] < fs[b]; });
  };

  SimplexResult result;
  while (true) {
    sort_order();
    const int lo = order[0];
    const int hi = order[m - 1];
    const int next_hi = order[m - 2];

    if (small_spread(fs[lo], fs[hi], opts)) {
      result.converged = true;
      break;
    }
    if (evals >= opts.max_evaluations) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < m; ++i) {
      if (i != hi) centroid += xs[i];
    }
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[hi]);
    const double f_ref = eval(reflected);

    if (f_ref < fs[lo]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[hi]);
      const double f_exp = eval(expanded);
      if (f_exp < f_ref) {
        xs[hi] = expanded;
        fs[hi] = f_exp;
      } else {
        xs[hi] = reflected;
        fs[hi] = f_ref;
      }
    } else if (f_ref < fs[next_hi]) {
      xs[hi] = reflected;
      fs[hi] = f_ref;
    } else {
      const bool outside = f_ref < fs[hi];
      const Eigen::VectorXd& base = outside ? reflected : xs[hi];
      const Eigen::VectorXd contracted = centroid + 0.5 * (base - centroid);
      const double f_con = eval(contracted);
      if (f_con < std::min(f_ref, fs[hi])) {
        xs[hi] = contracted;
        fs[hi] = f_con;
      } else {
        // shrink toward the best vertex
        for (int i = 0; i < m; ++i) {
          if (i == lo) continue;
          xs[i] = xs[lo] + 0.5 * (xs[i] - xs[lo]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }

  sort_order();
  result.x = xs[order[0]];
  result.value = fs[order[0]];
  result.evaluations = evals;
  return result;
}

}  // namespace ebma
