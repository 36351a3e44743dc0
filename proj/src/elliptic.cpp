#include "annulus/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "annulus/errors.hpp"

namespace annulus::elliptic {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2;

// Duplication stops once the spread of the arguments, scaled by 4^-n, falls
// below this fraction of their mean; the truncated Taylor series is then
// accurate to a few ulps. R_F carries a seventh-order series, R_D and R_J a
// fifth-order one.
const double kToleranceRF = std::pow(3.0 * kEps * 0.01, 1.0 / 8.0);
const double kToleranceRD = std::pow(kEps / 16.0, 1.0 / 6.0);

[[noreturn]] void domain(const std::string& what) {
  throw DomainError("elliptic: " + what);
}

void check_angle(double phi) {
  if (!(phi >= 0.0 && phi <= kHalfPi)) {
    domain("amplitude phi=" + std::to_string(phi) + " outside [0, pi/2]");
  }
}

void check_unit_parameter(const EllipticParameter& m) {
  if (!(m.m() >= 0.0 && m.mc() >= 0.0 && m.m() <= 1.0)) {
    domain("parameter m=" + std::to_string(m.m()) + " outside [0, 1]");
  }
}

}  // namespace

double carlson_rc(double x, double y) {
  if (!(x >= 0.0 && y != 0.0)) domain("R_C requires x >= 0 and y != 0");
  if (y < 0.0) {
    // Cauchy principal value.
    return std::sqrt(x / (x - y)) * carlson_rc(x - y, -y);
  }
  if (x == y) return 1.0 / std::sqrt(x);
  if (x < y) {
    const double d = y - x;
    return std::atan(std::sqrt(d / x)) / std::sqrt(d);
  }
  const double d = x - y;
  return std::atanh(std::sqrt(d / x)) / std::sqrt(d);
}

double carlson_rf(double x, double y, double z) {
  if (!(x >= 0.0 && y >= 0.0 && z >= 0.0)) domain("R_F requires x, y, z >= 0");
  if ((x == 0.0) + (y == 0.0) + (z == 0.0) > 1) domain("R_F: two arguments vanish");

  const double a0 = (x + y + z) / 3.0;
  double an = a0;
  const double q =
      std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)}) /
      kToleranceRF;
  double xn = x, yn = y, zn = z;
  double scale = 1.0;  // 4^-n
  while (q * scale >= std::abs(an)) {
    const double sx = std::sqrt(xn), sy = std::sqrt(yn), sz = std::sqrt(zn);
    const double lambda = sx * sy + sx * sz + sy * sz;
    an = (an + lambda) / 4.0;
    xn = (xn + lambda) / 4.0;
    yn = (yn + lambda) / 4.0;
    zn = (zn + lambda) / 4.0;
    scale /= 4.0;
  }
  const double dx = (a0 - x) * scale / an;
  const double dy = (a0 - y) * scale / an;
  const double dz = -(dx + dy);
  const double e2 = dx * dy - dz * dz;
  const double e3 = dx * dy * dz;
  // DLMF 19.36.1, through seventh order.
  const double series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 -
                        3.0 * e2 * e3 / 44.0 - 5.0 * e2 * e2 * e2 / 208.0 +
                        3.0 * e3 * e3 / 104.0 + e2 * e2 * e3 / 16.0;
  return series / std::sqrt(an);
}

double carlson_rd(double x, double y, double z) {
  if (!(x >= 0.0 && y >= 0.0 && z > 0.0)) domain("R_D requires x, y >= 0, z > 0");
  if (x == 0.0 && y == 0.0) domain("R_D: x and y both vanish");

  const double a0 = (x + y + 3.0 * z) / 5.0;
  double an = a0;
  const double q =
      std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)}) /
      kToleranceRD;
  double xn = x, yn = y, zn = z;
  double scale = 1.0;
  double sum = 0.0;
  while (q * scale >= std::abs(an)) {
    const double sx = std::sqrt(xn), sy = std::sqrt(yn), sz = std::sqrt(zn);
    const double lambda = sx * sy + sx * sz + sy * sz;
    sum += scale / (sz * (zn + lambda));
    an = (an + lambda) / 4.0;
    xn = (xn + lambda) / 4.0;
    yn = (yn + lambda) / 4.0;
    zn = (zn + lambda) / 4.0;
    scale /= 4.0;
  }
  const double dx = (a0 - x) * scale / an;
  const double dy = (a0 - y) * scale / an;
  const double dz = -(dx + dy) / 3.0;
  const double xy = dx * dy, z2 = dz * dz;
  const double e2 = xy - 6.0 * z2;
  const double e3 = (3.0 * xy - 8.0 * z2) * dz;
  const double e4 = 3.0 * (xy - z2) * z2;
  const double e5 = xy * z2 * dz;
  const double series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 -
                        3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0;
  return scale * series / (an * std::sqrt(an)) + 3.0 * sum;
}

double carlson_rj(double x, double y, double z, double p) {
  if (!(x >= 0.0 && y >= 0.0 && z >= 0.0 && p > 0.0)) {
    domain("R_J requires x, y, z >= 0 and p > 0");
  }
  if ((x == 0.0) + (y == 0.0) + (z == 0.0) > 1) domain("R_J: two arguments vanish");

  const double a0 = (x + y + z + 2.0 * p) / 5.0;
  double an = a0;
  const double delta = (p - x) * (p - y) * (p - z);
  const double q = std::max({std::abs(a0 - x), std::abs(a0 - y),
                             std::abs(a0 - z), std::abs(a0 - p)}) /
                   kToleranceRD;
  double xn = x, yn = y, zn = z, pn = p;
  double scale = 1.0;   // 4^-n
  double scale3 = 1.0;  // 4^-3n
  double sum = 0.0;
  while (q * scale >= std::abs(an)) {
    const double sx = std::sqrt(xn), sy = std::sqrt(yn), sz = std::sqrt(zn),
                 sp = std::sqrt(pn);
    const double lambda = sx * sy + sx * sz + sy * sz;
    const double d = (sp + sx) * (sp + sy) * (sp + sz);
    const double e = scale3 * delta / (d * d);
    sum += scale * carlson_rc(1.0, 1.0 + e) / d;
    an = (an + lambda) / 4.0;
    xn = (xn + lambda) / 4.0;
    yn = (yn + lambda) / 4.0;
    zn = (zn + lambda) / 4.0;
    pn = (pn + lambda) / 4.0;
    scale /= 4.0;
    scale3 /= 64.0;
  }
  const double dx = (a0 - x) * scale / an;
  const double dy = (a0 - y) * scale / an;
  const double dz = (a0 - z) * scale / an;
  const double dp = -(dx + dy + dz) / 2.0;
  const double e2 = dx * dy + dx * dz + dy * dz - 3.0 * dp * dp;
  const double e3 = dx * dy * dz + 2.0 * e2 * dp + 4.0 * dp * dp * dp;
  const double e4 = (2.0 * dx * dy * dz + e2 * dp + 3.0 * dp * dp * dp) * dp;
  const double e5 = dx * dy * dz * dp * dp;
  const double series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 -
                        3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0;
  return scale * series / (an * std::sqrt(an)) + 6.0 * sum;
}

double complete_K(EllipticParameter m) {
  if (!(m.mc() > 0.0)) {
    domain("K(m) diverges for m >= 1 (m=" + std::to_string(m.m()) + ")");
  }
  return carlson_rf(0.0, m.mc(), 1.0);
}

double complete_E(EllipticParameter m) {
  if (!(m.mc() >= 0.0)) domain("E(m) undefined for m > 1");
  const double mc = m.mc();
  if (mc == 0.0) return 1.0;
  // DLMF 19.25.1; both terms are positive.
  return mc * (carlson_rd(0.0, mc, 1.0) + carlson_rd(0.0, 1.0, mc)) / 3.0;
}

double complete_Pi(EllipticCharacteristic n, EllipticParameter m) {
  if (!(m.mc() > 0.0)) domain("Pi(n|m) requires m < 1");
  if (n.n2 == 1.0) domain("Pi(n|m) diverges at the singular characteristic n^2 = 1");
  if (n.n2 > 1.0) {
    // Principal value: Pi(n) + Pi(m/n) = K(m) for n > 1.
    return complete_K(m) - complete_Pi(EllipticCharacteristic(m.m() / n.n2), m);
  }
  const double k = carlson_rf(0.0, m.mc(), 1.0);
  if (n.n2 == 0.0) return k;
  return k + n.n2 * carlson_rj(0.0, m.mc(), 1.0, 1.0 - n.n2) / 3.0;
}

double incomplete_F(double phi, EllipticParameter m) {
  check_angle(phi);
  check_unit_parameter(m);
  if (phi == kHalfPi) {
    if (m.mc() == 0.0) domain("F(pi/2 | 1) diverges");
    return complete_K(m);
  }
  if (phi == 0.0) return 0.0;
  const double s = std::sin(phi), c = std::cos(phi);
  const double delta2 = m.mc() + m.m() * c * c;
  return s * carlson_rf(c * c, delta2, 1.0);
}

double incomplete_E(double phi, EllipticParameter m) {
  check_angle(phi);
  check_unit_parameter(m);
  if (phi == kHalfPi) return complete_E(m);
  if (phi == 0.0) return 0.0;
  const double s = std::sin(phi), c = std::cos(phi);
  const double delta2 = m.mc() + m.m() * c * c;
  // DLMF 19.25.10 rewritten in sin/cos; every term is non-negative.
  double result = m.m() * s * c / std::sqrt(delta2);
  if (m.mc() != 0.0) {
    result += m.mc() * s * carlson_rf(c * c, delta2, 1.0);
    if (m.m() != 0.0) {
      result += m.m() * m.mc() * s * s * s * carlson_rd(c * c, 1.0, delta2) / 3.0;
    }
  }
  return result;
}

double heuman_combination(double phi, EllipticParameter m) {
  check_angle(phi);
  check_unit_parameter(m);
  if (phi == 0.0) return 0.0;
  const auto comp = EllipticParameter::from_complement(m.m());
  if (m.m() == 0.0) {
    // K = E = pi/2 and the sum collapses to (pi/2) E(phi|1) = (pi/2) sin(phi).
    return kHalfPi * std::sin(phi);
  }
  if (m.mc() == 0.0) {
    // K(m) multiplies E(phi|0) - F(phi|0) = 0; the limit is E(1) F(phi|0).
    return phi;
  }
  const double k = complete_K(m);
  const double e = complete_E(m);
  const double f_c = incomplete_F(phi, comp);
  if (phi == kHalfPi) return e * f_c + k * (complete_E(comp) - f_c);
  // E(phi|mc) - F(phi|mc) = -(mc/3) s^3 R_D(c^2, 1 - mc s^2, 1).
  const double s = std::sin(phi), c = std::cos(phi);
  const double delta2 = m.m() + m.mc() * c * c;
  const double e_minus_f =
      m.m() == 1.0 ? 0.0
                   : -comp.m() * s * s * s * carlson_rd(c * c, delta2, 1.0) / 3.0;
  return e * f_c + k * e_minus_f;
}

double heuman_lambda(double phi, EllipticParameter m) {
  return heuman_combination(phi, m) / kHalfPi;
}

double radial_kernel(EllipticParameter m) {
  if (!(m.mc() > 0.0)) domain("radial kernel diverges for m >= 1");
  const double x = m.m();
  if (x >= 0.0 && x <= 0.5) {
    // (pi/2) sum_{n>=2} a_{n-1} (n-1)/(2n) m^n with a_n = ((1/2)_n / n!)^2;
    // all terms positive.
    double a_prev = 0.25;  // a_1
    double power = x * x;
    double sum = 0.0;
    for (int n = 2; n < 200; ++n) {
      const double term = a_prev * (n - 1) / (2.0 * n) * power;
      sum += term;
      if (term <= kEps * 0.01 * sum) break;
      const double r = (2.0 * n - 1.0) / (2.0 * n);
      a_prev *= r * r;
      power *= x;
    }
    return kHalfPi * sum;
  }
  return 0.5 * (1.0 + m.mc()) * complete_K(m) - complete_E(m);
}

double k_minus_e(EllipticParameter m) {
  if (!(m.mc() > 0.0)) domain("K(m) - E(m) diverges for m >= 1");
  if (m.m() == 0.0) return 0.0;
  // K - E = (m/3) R_D(0, 1 - m, 1).
  return m.m() * carlson_rd(0.0, m.mc(), 1.0) / 3.0;
}

}  // namespace annulus::elliptic
