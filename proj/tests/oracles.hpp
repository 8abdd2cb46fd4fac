// Independent numerical oracles used by the test suites. These deliberately
// avoid the library's closed-form code paths so the checks stay two-route.
#pragma once

#include <cmath>
#include <cstddef>

namespace oracles {

/// Classic fixed-step RK4 for dx/dt = x*(a - b*x).
inline double logistic_rk4(double a, double b, double x0, double t,
                           std::size_t steps = 200000) {
  const double h = t / static_cast<double>(steps);
  auto f = [&](double x) { return x * (a - b * x); };
  double x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * h * k1);
    const double k3 = f(x + 0.5 * h * k2);
    const double k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// Bisection root of fn on [lo, hi]; assumes one sign change.
template <typename Fn>
double bisect(Fn&& fn, double lo, double hi, int iters = 200) {
  double flo = fn(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
