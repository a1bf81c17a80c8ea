#pragma once

#include <functional>

namespace ebma {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  int max_depth = 20;
};

/// Adaptive Simpson integration of f on [a, b]. Throws NumericError when
/// the refinement budget is exhausted before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

}  // namespace ebma
