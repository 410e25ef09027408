#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mjr/error.hpp"

namespace mjr {

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth, bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    converged = false;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
// `panels` are interior points forced to be panel boundaries (where f may be
// non-smooth); f is only evaluated strictly inside each panel's closure via
// the caller's own one-sided convention. Throws NumericalError when the
// recursion depth is exhausted.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol,
                        std::span<const double> panels = {}, int max_depth = 48) {
  if (b == a) return 0.0;
  std::vector<double> edges{a};
  for (double p : panels) {
    if (p > a && p < b && p > edges.back()) edges.push_back(p);
  }
  edges.push_back(b);
  const double span_len = b - a;
  double total = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi = edges[i + 1];
    // Evaluate endpoints slightly inside so one-sided limits are used.
    const double eps = 1e-13 * std::max(1.0, std::abs(hi));
    const double flo = f(lo + eps);
    const double fhi = f(hi - eps);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    const double panel_tol = tol * (hi - lo) / span_len;
    total += detail::simpson_recurse(f, lo, hi, flo, fm, fhi, whole, panel_tol, max_depth,
                                     converged);
  }
  if (!converged) throw NumericalError("adaptive Simpson quadrature did not converge");
  return total;
}

}  // namespace mjr
