#pragma once

// Integrals over one period of integrands built from hull functions. The
// caller supplies every point where the integrand may jump or lose
// smoothness; each piece between consecutive breakpoints is integrated by
// adaptive Gauss-Kronrod, or by one midpoint value for step integrands.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fkhull/hull.hpp"
#include "fkhull/model.hpp"

namespace fkhull {

inline void add_breakpoint(std::vector<double>& breaks, double theta) {
  breaks.push_back(theta - std::floor(theta));
}

/// Breakpoints of h and of theta -> h(theta + shift).
template <hull_like H>
void add_hull_breakpoints(std::vector<double>& breaks, const H& h, double shift = 0.0) {
  for (double b : h.breakpoints()) add_breakpoint(breaks, b - shift);
}

/// Phases where h crosses the edges of the support of v (every lifted copy
/// that h reaches within one period), so v(h(theta)) is smooth between them.
template <hull_like H>
void add_support_crossings(std::vector<double>& breaks, const H& h, const Potential& v) {
  if (!v.is_bump()) return;
  const double lo = h(0.0);
  const double hi = lo + 1.0;
  for (double m = std::floor(lo - v.x0 - v.R) - 1.0; m <= std::ceil(hi - v.x0 + v.R) + 1.0; m += 1.0) {
    for (double level : {v.x0 + m - v.R, v.x0 + m + v.R}) {
      if (level < lo || level > hi) continue;
      add_breakpoint(breaks, lower_preimage(h, level, 0.0, 1.0));
      add_breakpoint(breaks, upper_preimage(h, level, 0.0, 1.0));
    }
  }
}

/// With `step` set the integrand is taken as constant on each piece and is
/// evaluated once at the piece midpoint.
template <class F>
double integrate_period(const F& f, std::vector<double> breaks, bool step = false) {
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    if (!(b > a)) continue;
    if (step) {
      total += (b - a) * f(0.5 * (a + b));
      continue;
    }
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, 1e-13);
  }
  return total;
}

}  // namespace fkhull
