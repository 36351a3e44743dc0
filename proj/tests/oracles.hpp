#pragma once

// Reference computations used only by the tests. They integrate the
// defining integrals directly and share no code with the library kernels.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracles {

/// Tanh-sinh quadrature of f on [a, b]; the interval may carry integrable
/// endpoint singularities. Step halving stops when two levels agree to tol.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-15) {
  const double d = 0.5 * (b - a);
  auto level_sum = [&](double h, bool odd_only) {
    double sum = 0.0;
    for (int sgn : {1, -1}) {
      for (int k = odd_only ? 1 : (sgn == 1 ? 0 : 1);; k += odd_only ? 2 : 1) {
        const double t = sgn * k * h;
        const double s = 0.5 * std::numbers::pi * std::sinh(t);
        const double ch = std::cosh(s);
        const double w = 0.5 * std::numbers::pi * std::cosh(t) / (ch * ch);
        if (w < 1e-300) break;
        // Distance to the nearer endpoint, computed without cancellation.
        const double gap = d * std::exp(-std::abs(s)) / ch;
        const double x = s >= 0.0 ? b - gap : a + gap;
        if (!(x > a && x < b)) {
          if (k > 0) break;
          continue;
        }
        const double v = f(x) * w;
        sum += v;
        if (k > 3 && std::abs(v) < 1e-20 * std::abs(sum)) break;
      }
    }
    return sum;
  };

  double h = 1.0;
  double sum = level_sum(h, false);
  double prev = sum * h * d;
  for (int level = 1; level < 12; ++level) {
    h *= 0.5;
    sum += level_sum(h, true);
    const double cur = sum * h * d;
    if (level > 3 && std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

inline double K(double m) {
  return tanh_sinh([m](double t) { return 1.0 / std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); },
                   0.0, 0.5 * std::numbers::pi);
}

inline double E(double m) {
  return tanh_sinh([m](double t) { return std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); }, 0.0,
                   0.5 * std::numbers::pi);
}

inline double Pi(double n2, double m) {
  return tanh_sinh(
      [=](double t) {
        const double s2 = std::sin(t) * std::sin(t);
        return 1.0 / ((1.0 - n2 * s2) * std::sqrt(1.0 - m * s2));
      },
      0.0, 0.5 * std::numbers::pi);
}

inline double F(double phi, double m) {
  if (phi == 0.0) return 0.0;
  return tanh_sinh([m](double t) { return 1.0 / std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); },
                   0.0, phi);
}

inline double Einc(double phi, double m) {
  if (phi == 0.0) return 0.0;
  return tanh_sinh([m](double t) { return std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); }, 0.0,
                   phi);
}

inline double heuman(double phi, double m) {
  const double mc = 1.0 - m;
  return 2.0 / std::numbers::pi *
         (E(m) * F(phi, mc) + K(m) * Einc(phi, mc) - K(m) * F(phi, mc));
}

}  // namespace oracles
