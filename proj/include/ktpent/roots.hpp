#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace ktpent::roots {

/// Interval [lo, hi] across which f changes sign (or touches zero).
struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;
};

/// Walks [lo, hi] in increments of `step` and returns the first sub-interval
/// with a sign change. Points where `f` throws are not caught; callers that
/// want to skip them should wrap `f`.
template <typename F>
std::optional<Bracket> scan_for_sign_change(F&& f, double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) return std::nullopt;
  double a = lo;
  double fa = f(a);
  if (fa == 0.0) return Bracket{a, a, fa, fa};
  while (a < hi) {
    const double b = std::min(a + step, hi);
    const double fb = f(b);
    if (fb == 0.0 || std::signbit(fa) != std::signbit(fb)) return Bracket{a, b, fa, fb};
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

/// Bisection inside a sign-change bracket until the interval is narrower than
/// `x_tol`. Returns the midpoint of the final interval.
template <typename F>
double bisect(F&& f, Bracket br, double x_tol) {
  if (br.f_lo == 0.0) return br.lo;
  if (br.f_hi == 0.0) return br.hi;
  double a = br.lo;
  double b = br.hi;
  double fa = br.f_lo;
  for (int iter = 0; iter < 200 && (b - a) > x_tol; ++iter) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (std::signbit(fm) == std::signbit(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Golden-section search for a minimum of a unimodal function on [lo, hi].
template <typename F>
std::pair<double, double> golden_minimize(F&& f, double lo, double hi, double x_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while ((b - a) > x_tol) {
    if (fc < fd) {
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
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace ktpent::roots
