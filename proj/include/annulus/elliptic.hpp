#pragma once

// Complete and incomplete elliptic integrals in the parameter convention
// m = k^2, evaluated through Carlson's symmetric forms.
//
// Every public entry point takes the parameter m, never the modulus k. Callers
// that already know the complementary parameter 1 - m more accurately than the
// subtraction would give (this happens whenever m is built as 4ar/p^2 and
// 1 - m as q^2/p^2) pass it through EllipticParameter::from_complement.

namespace annulus::elliptic {

/// Parameter m = k^2 together with its complement mc = 1 - m.
class EllipticParameter {
 public:
  /// Parameter from m; the complement is formed by subtraction.
  explicit EllipticParameter(double m) : m_(m), mc_(1.0 - m) {}

  static EllipticParameter from_complement(double mc) {
    return EllipticParameter(1.0 - mc, mc);
  }
  /// Both values supplied by the caller, each computed without cancellation.
  static EllipticParameter from_pair(double m, double mc) {
    return EllipticParameter(m, mc);
  }
  static EllipticParameter from_modulus(double k) {
    return EllipticParameter(k * k);
  }

  double m() const noexcept { return m_; }
  double mc() const noexcept { return mc_; }

 private:
  EllipticParameter(double m, double mc) : m_(m), mc_(mc) {}

  double m_;
  double mc_;
};

/// Characteristic n^2 of the third-kind integral.
struct EllipticCharacteristic {
  explicit EllipticCharacteristic(double n2_) : n2(n2_) {}
  double n2;
};

// Carlson's symmetric integrals (duplication algorithm).
double carlson_rf(double x, double y, double z);
double carlson_rd(double x, double y, double z);
double carlson_rj(double x, double y, double z, double p);
double carlson_rc(double x, double y);

/// K(m). Accepts m < 0; m >= 1 raises DomainError.
double complete_K(EllipticParameter m);
/// E(m). Accepts m < 0 and m = 1 (E = 1); m > 1 raises DomainError.
double complete_E(EllipticParameter m);
/// Pi(n^2 | m), the Cauchy principal value when n^2 > 1.
/// n^2 = 1 or m >= 1 raises DomainError.
double complete_Pi(EllipticCharacteristic n2, EllipticParameter m);

/// F(phi | m) for phi in [0, pi/2], m in [0, 1]; (pi/2, 1) is rejected.
double incomplete_F(double phi, EllipticParameter m);
/// E(phi | m) for phi in [0, pi/2], m in [0, 1].
double incomplete_E(double phi, EllipticParameter m);

/// Heuman's lambda function, through the combination
///   (2/pi) (E(m) F(phi|mc) + K(m) E(phi|mc) - K(m) F(phi|mc)).
double heuman_lambda(double phi, EllipticParameter m);

/// E(m) F(phi|mc) + K(m) E(phi|mc) - K(m) F(phi|mc), i.e. (pi/2) Lambda0.
/// Exposed separately because the disk potential consumes exactly this sum.
double heuman_combination(double phi, EllipticParameter m);

/// (1 - m/2) K(m) - E(m), free of cancellation for small m.
/// This is the radial kernel of the disk and annulus force.
double radial_kernel(EllipticParameter m);

/// K(m) - E(m), free of cancellation for small m.
double k_minus_e(EllipticParameter m);

// Convenience overloads in the plain-double parameter convention.
inline double complete_K(double m) { return complete_K(EllipticParameter(m)); }
inline double complete_E(double m) { return complete_E(EllipticParameter(m)); }
inline double complete_Pi(double n2, double m) {
  return complete_Pi(EllipticCharacteristic(n2), EllipticParameter(m));
}
inline double incomplete_F(double phi, double m) {
  return incomplete_F(phi, EllipticParameter(m));
}
inline double incomplete_E(double phi, double m) {
  return incomplete_E(phi, EllipticParameter(m));
}
inline double heuman_lambda(double phi, double m) {
  return heuman_lambda(phi, EllipticParameter(m));
}

}  // namespace annulus::elliptic
