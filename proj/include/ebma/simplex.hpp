#pragma once

#include <Eigen/Core>
#include <functional>

namespace ebma {

struct SimplexOptions {
  int max_evaluations = 5000;
  double f_tol_rel = 1e-10;
  double f_tol_abs = 1e-14;
  /// Per-coordinate displacement used to build the initial simplex:
  /// step_i = initial_step * max(1, |x0_i|).
  double initial_step = 0.5;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimization (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). The objective may return +infinity to
/// mark infeasible points; it must not return NaN.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0,
                          const SimplexOptions& opts = {});

}  // namespace ebma
