#include "ebma/quadrature.hpp"

#include <cmath>

#include "ebma/errors.hpp"

namespace ebma {

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  int max_depth;
  double unmet_error = 0.0;
};

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(SimpsonState& st, double a, double b, double fa, double fm, double fb,
              double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * eps) {
    return left + right + err / 15.0;
  }
  if (depth >= st.max_depth) {
    st.unmet_error += std::abs(err) / 15.0;
    return left + right + err / 15.0;
  }
  return refine(st, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
         refine(st, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    throw InvalidInputError("integrate: empty interval (a > b)");
  }

  // Coarse composite estimate to pin the magnitude the relative tolerance
  // refers to; the integrand may be sharply concentrated.
  const int coarse_n = 32;
  double coarse = 0.0;
  double prev_x = a;
  double prev_f = f(a);
  for (int i = 1; i <= coarse_n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / coarse_n;
    const double fx = f(x);
    const double fm = f(0.5 * (prev_x + x));
    coarse += simpson(prev_f, fm, fx, x - prev_x);
    prev_x = x;
    prev_f = fx;
  }

  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(coarse));
  const double eps = tol > 0.0 ? tol : 1e-300;

  SimpsonState st{f, opts.max_depth, 0.0};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson(fa, fm, fb, b - a);
  const double value = refine(st, a, b, fa, fm, fb, whole, eps, 0);

  if (st.unmet_error > std::max(tol, opts.rel_tol * std::abs(value))) {
    throw NumericError("integrate: refinement budget exhausted before tolerance");
  }
  return value;
}

}  // namespace ebma
