#pragma once

#include <cmath>

namespace corrsense {

struct ScalarMinimum {
  double argmin = 0.0;
  double value = 0.0;
};

/// Golden-section search for a unimodal f on [lo, hi], stopping once the
/// bracket is narrower than tol. Both endpoints are also evaluated so that
/// boundary minima are returned exactly.
template <class F>
ScalarMinimum golden_section(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
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
  }
  ScalarMinimum best = fc <= fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
  const double flo = f(lo);
  if (flo <= best.value) best = {lo, flo};
  const double fhi = f(hi);
  if (fhi < best.value) best = {hi, fhi};
  return best;
}

}  // namespace corrsense
