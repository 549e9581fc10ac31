#pragma once

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace qjunction {

/// Composite Gauss-Legendre rule: ceil(n_points/16) equal panels of 16 nodes.
template <class F>
double gauss_legendre(F&& f, double a, double b, int n_points) {
  using Rule = boost::math::quadrature::gauss<double, 16>;
  const int panels = std::max(1, (n_points + 15) / 16);
  const double w = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * w;
    sum += Rule::integrate(f, lo, lo + w);
  }
  return sum;
}

/// sin(x)/x without cancellation near 0.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

/// Closed form of \int_{t0}^{t1} cos(w t + phase) dt, stable for w -> 0.
inline double integral_cos(double w, double phase, double t0, double t1) {
  const double len = t1 - t0;
  const double mid = 0.5 * (t0 + t1);
  return len * std::cos(w * mid + phase) * sinc(0.5 * w * len);
}

}  // namespace qjunction
