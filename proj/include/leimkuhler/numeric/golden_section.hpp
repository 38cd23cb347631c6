#pragma once

#include <cmath>

#include "leimkuhler/errors.hpp"

namespace leimkuhler::numeric {

struct ScalarOptimum {
  double argument = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [lower, upper].
/// Stops once the bracket is narrower than `x_tol`; endpoints are considered
/// so a monotone f returns the boundary.
template <class F>
ScalarOptimum golden_section_maximize(F&& f, double lower, double upper, double x_tol,
                                      int max_iterations = 500) {
  if (!(x_tol > 0.0)) throw DomainError("golden-section tolerance must be positive");
  if (!(lower < upper)) throw DomainError("golden-section bracket is empty");

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lower, b = upper;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int it = 0;
  while (b - a > x_tol && it < max_iterations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }

  ScalarOptimum best{c, fc, it};
  if (fd > best.value) best = {d, fd, it};
  const double mid = 0.5 * (a + b);
  if (const double fm = f(mid); fm > best.value) best = {mid, fm, it};
  if (const double fl = f(lower); fl > best.value) best = {lower, fl, it};
  if (const double fu = f(upper); fu > best.value) best = {upper, fu, it};
  return best;
}

}  // namespace leimkuhler::numeric
