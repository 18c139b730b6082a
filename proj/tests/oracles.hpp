#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's quadrature, root finder or summation, so agreement with them is
// evidence rather than tautology.

#include <cmath>
#include <functional>

namespace oracle {

/// Composite Simpson rule in long double on [a, b] with `panels` (even) panels.
inline long double simpson(const std::function<long double(long double)>& f, long double a,
                           long double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const long double h = (b - a) / panels;
  long double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0L : 2.0L) * f(a + i * h);
  return sum * h / 3.0L;
}

/// Derivative by Richardson-extrapolated central differences (error O(h^6)).
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-2) {
  auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  const double d1 = central(h);
  const double d2 = central(h / 2.0);
  const double d4 = central(h / 4.0);
  const double r1 = (4.0 * d2 - d1) / 3.0;
  const double r2 = (4.0 * d4 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

inline long double normal_pdf(long double x) {
  return std::exp(-0.5L * x * x) / std::sqrt(2.0L * 3.141592653589793238462643383279502884L);
}

/// Phi from the everywhere-convergent series
/// 1/2 + phi(x) (x + x^3/3 + x^5/(3*5) + ...), in long double.
inline double normal_cdf(double x) {
  const long double ax = std::abs(static_cast<long double>(x));
  long double term = ax, sum = ax;
  for (int k = 1; term > 1e-24L * sum; ++k) {
    term *= ax * ax / (2 * k + 1);
    sum += term;
  }
  const long double upper = 0.5L + normal_pdf(ax) * sum;
  return static_cast<double>(x < 0 ? 1.0L - upper : upper);
}

}  // namespace oracle
