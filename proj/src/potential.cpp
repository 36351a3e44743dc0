#include "annulus/potential.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "annulus/elliptic.hpp"
#include "annulus/errors.hpp"

namespace annulus::potential {

namespace {

using elliptic::EllipticParameter;
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Distances from the field point (r, z) to the nearest and farthest points of
// the circle of radius R, and the elliptic parameter built from them.
struct RingGeometry {
  double p;
  double q2;
  EllipticParameter param;
};

RingGeometry ring_geometry(double R, double r, double z) {
  const double sum = R + r;
  const double diff = R - r;
  const double p2 = sum * sum + z * z;
  const double q2 = diff * diff + z * z;
  return {std::sqrt(p2), q2, EllipticParameter::from_pair(4.0 * R * r / p2, q2 / p2)};
}

void reject_edge(double R, double r, double z) {
  if (z == 0.0 && r == R)
    throw SingularityError("field point lies on a plate edge circle");
}

// Beyond this many disk radii the closed forms lose (D / R)^2 of their
// relative accuracy to cancellation; the exterior expansion is used instead.
constexpr double kFarField = 8.0;

struct FarField {
  double B, dr, dz;
};

// Exterior expansion of the bracket, valid for D = |(r, z)| > R:
//   B = -pi sum_{n >= 1} binom(1/2, n) R^(2n) P_(2n-2)(z / D) / D^(2n-1),
// the axis series of the disk continued off the axis with Legendre harmonics.
FarField disk_far_field(double R, double r, double z) {
  constexpr int kMaxTerms = 40;
  const double D = std::hypot(r, z);
  const double c = z / D;
  std::array<double, 2 * kMaxTerms + 1> P{}, dP{};
  P[0] = 1.0;
  P[1] = c;
  dP[1] = 1.0;
  for (int l = 1; l + 1 < static_cast<int>(P.size()); ++l) {
    P[l + 1] = ((2 * l + 1) * c * P[l] - l * P[l - 1]) / (l + 1);
    dP[l + 1] = dP[l - 1] + (2 * l + 1) * P[l];
  }
  const double t = (R / D) * (R / D);
  double binom = 0.5;
  double scale = R * R / D;
  double sb = 0.0, sr = 0.0, sz = 0.0;
  for (int n = 1; n <= kMaxTerms; ++n) {
    const int l = 2 * n - 2;
    const double w = binom * scale;
    sb += w * P[l];
    sr -= w * (r / (D * D)) * dP[l + 1];
    sz -= w * ((l + 1) / D) * P[l + 1];
    if (std::abs(w) < 1e-18 * std::abs(sb)) break;
    binom *= (0.5 - n) / (n + 1);
    scale *= t;
  }
  return {-kPi * sb, -kPi * sr, -kPi * sz};
}

// B(R; r, z) such that a uniform disk of radius R and density G sigma has
// potential 2 G sigma B.
double disk_bracket(double R, double r, double z) {
  reject_edge(R, r, z);
  if (std::hypot(r, z) > kFarField * R) return disk_far_field(R, r, z).B;
  const auto g = ring_geometry(R, r, z);
  const double K = elliptic::complete_K(g.param);
  const double E = elliptic::complete_E(g.param);
  if (z == 0.0) return -(R + r) * E - (R - r) * K;

  const double az = std::abs(z);
  const double s = sign(R - r);
  double B = -g.p * E - ((R - r) * (R + r) / g.p) * K + az * kHalfPi * (1.0 + s);
  if (s != 0.0) {
    const double phi = std::atan2(az, std::abs(R - r));
    B -= az * s * elliptic::heuman_combination(phi, g.param);
  }
  return B;
}

// (dB/dr, dB/dz). At z = 0 the normal derivative is the mean of the two
// one-sided values, which is zero.
std::pair<double, double> disk_bracket_gradient(double R, double r, double z) {
  reject_edge(R, r, z);
  if (std::hypot(r, z) > kFarField * R) {
    const auto f = disk_far_field(R, r, z);
    return {f.dr, f.dz};
  }
  const auto g = ring_geometry(R, r, z);
  const double dr = r > 0.0 ? g.p * elliptic::radial_kernel(g.param) / r : 0.0;
  if (z == 0.0) return {dr, 0.0};

  const double K = elliptic::complete_K(g.param);
  const double s = sign(R - r);
  double inner = kHalfPi * (1.0 + s);
  if (s != 0.0) {
    const double phi = std::atan2(std::abs(z), std::abs(R - r));
    inner -= s * elliptic::heuman_combination(phi, g.param);
  }
  return {dr, -(z / g.p) * K + sign(z) * inner};
}

Vec3 to_cartesian(const FieldPoint& p, double dr, double dz) {
  const double r = p.r();
  if (r == 0.0) return {0.0, 0.0, dz};
  return {dr * p.x / r, dr * p.y / r, dz};
}

bool on_annulus_plate(const AnnulusBody& an, double r, double z) {
  return z == 0.0 && r >= an.b() && r <= an.a();
}

void require_finite(const FieldPoint& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
    throw DomainError("field point must have finite coordinates");
}

std::pair<double, double> annulus_cyl_gradient(const AnnulusBody& an, double r, double z) {
  const auto [ra, za] = disk_bracket_gradient(an.a(), r, z);
  const auto [rb, zb] = disk_bracket_gradient(an.b(), r, z);
  const double c = 2.0 * an.surface_density();
  return {c * (ra - rb), c * (za - zb)};
}

}  // namespace

double wire_potential(const WireBody& body, const FieldPoint& p) {
  require_finite(p);
  const double r = p.r();
  reject_edge(body.a(), r, p.z);
  const auto g = ring_geometry(body.a(), r, p.z);
  return -(2.0 * body.mu() / (kPi * g.p)) * elliptic::complete_K(g.param);
}

Vec3 wire_gradient(const WireBody& body, const FieldPoint& p) {
  require_finite(p);
  const double r = p.r();
  const double a = body.a();
  reject_edge(a, r, p.z);
  const auto g = ring_geometry(a, r, p.z);
  const double E = elliptic::complete_E(g.param);
  const double c = body.mu() / (kPi * g.p);
  double dr = 0.0;
  if (r > 0.0) {
    const double kme_over_r = elliptic::k_minus_e(g.param) / r;
    dr = c * (kme_over_r - 2.0 * (a - r) * E / g.q2);
  }
  const double dz = 2.0 * c * p.z * E / g.q2;
  return to_cartesian(p, dr, dz);
}

double disk_potential_naive(const DiskBody& body, const FieldPoint& p) {
  require_finite(p);
  const double a = body.a();
  const double r = p.r();
  const double z = p.z;
  reject_edge(a, r, z);
  if (r == a)
    throw DomainError("Pi form of the disk potential is undefined at r = a (n^2 = 1)");

  const auto g = ring_geometry(a, r, z);
  const double K = elliptic::complete_K(g.param);
  const double E = elliptic::complete_E(g.param);
  const double n2 = 4.0 * a * r / ((a + r) * (a + r));
  const double Pi = elliptic::complete_Pi(elliptic::EllipticCharacteristic(n2), g.param);
  const double s = sign(a - r);
  const double az = std::abs(z);
  const double bracket = az * kHalfPi * (1.0 + s) - g.p * E -
                         ((a - r) * (a + r) / g.p) * K -
                         ((a - r) / (a + r)) * (z * z / g.p) * Pi;
  return 2.0 * body.surface_density() * bracket;
}

double disk_potential(const DiskBody& body, const FieldPoint& p) {
  require_finite(p);
  return 2.0 * body.surface_density() * disk_bracket(body.a(), p.r(), p.z);
}

Vec3 disk_gradient(const DiskBody& body, const FieldPoint& p) {
  require_finite(p);
  const double r = p.r();
  if (p.z == 0.0 && r <= body.a())
    throw FieldDiscontinuityError("gradient requested on the disk plate",
                                  4.0 * kPi * body.surface_density());
  const auto [dr, dz] = disk_bracket_gradient(body.a(), r, p.z);
  const double c = 2.0 * body.surface_density();
  return to_cartesian(p, c * dr, c * dz);
}

double annulus_potential(const AnnulusBody& body, const FieldPoint& p) {
  require_finite(p);
  const double r = p.r();
  return 2.0 * body.surface_density() *
         (disk_bracket(body.a(), r, p.z) - disk_bracket(body.b(), r, p.z));
}

Vec3 annulus_gradient(const AnnulusBody& body, const FieldPoint& p) {
  require_finite(p);
  const double r = p.r();
  if (on_annulus_plate(body, r, p.z))
    throw FieldDiscontinuityError("gradient requested on the annulus plate",
                                  body.normal_jump());
  const auto [dr, dz] = annulus_cyl_gradient(body, r, p.z);
  return to_cartesian(p, dr, dz);
}

double planar_potential(const AnnulusBody& body, double r) {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw DomainError("planar radius must be non-negative and finite");
  return 2.0 * body.surface_density() *
         (disk_bracket(body.a(), r, 0.0) - disk_bracket(body.b(), r, 0.0));
}

double planar_radial_derivative(const AnnulusBody& body, double r) {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw DomainError("planar radius must be non-negative and finite");
  return annulus_cyl_gradient(body, r, 0.0).first;
}

double axis_potential(const AnnulusBody& body, double z) {
  const double sa = std::hypot(body.a(), z);
  const double sb = std::hypot(body.b(), z);
  return -2.0 * body.mu() / (sa + sb);
}

double stack_potential(const BodyStack& stack, const FieldPoint& p) {
  double u = 0.0;
  for (const auto& an : stack.annuli()) u += annulus_potential(an, p);
  return u;
}

Vec3 stack_gradient(const BodyStack& stack, const FieldPoint& p) {
  require_finite(p);
  const double r = p.r();
  for (const auto& an : stack.annuli())
    if (on_annulus_plate(an, r, p.z))
      throw FieldDiscontinuityError("gradient requested on a plate of the stack",
                                    an.normal_jump());
  return stack_gradient_unchecked(stack, p);
}

Vec3 stack_gradient_unchecked(const BodyStack& stack, const FieldPoint& p) {
  const double r = p.r();
  double dr = 0.0;
  double dz = 0.0;
  for (const auto& an : stack.annuli()) {
    const auto [gr, gz] = annulus_cyl_gradient(an, r, p.z);
    dr += gr;
    dz += gz;
  }
  return to_cartesian(p, dr, dz);
}

double stack_planar_potential(const BodyStack& stack, double r) {
  double u = 0.0;
  for (const auto& an : stack.annuli()) u += planar_potential(an, r);
  return u;
}

double stack_planar_derivative(const BodyStack& stack, double r) {
  double d = 0.0;
  for (const auto& an : stack.annuli()) d += planar_radial_derivative(an, r);
  return d;
}

double stack_axis_potential(const BodyStack& stack, double z) {
  double u = 0.0;
  for (const auto& an : stack.annuli()) u += axis_potential(an, z);
  return u;
}

namespace {

FieldSample sample(const WireBody& w, const FieldPoint& p) {
  FieldSample s;
  if (p.z == 0.0 && p.r() == w.a()) {
    s.on_edge = true;
    return s;
  }
  s.U = wire_potential(w, p);
  s.grad = wire_gradient(w, p);
  return s;
}

FieldSample sample(const DiskBody& d, const FieldPoint& p) {
  FieldSample s;
  const double r = p.r();
  if (p.z == 0.0 && r == d.a()) {
    s.on_edge = true;
    return s;
  }
  s.U = disk_potential(d, p);
  if (p.z == 0.0 && r < d.a()) {
    s.on_plate = true;
    s.normal_jump = 4.0 * kPi * d.surface_density();
  } else {
    s.grad = disk_gradient(d, p);
  }
  return s;
}

FieldSample sample(const BodyStack& st, const FieldPoint& p) {
  FieldSample s;
  const double r = p.r();
  if (p.z == 0.0) {
    for (const auto& an : st.annuli()) {
      if (r == an.a() || r == an.b()) {
        s.on_edge = true;
        return s;
      }
      if (r > an.b() && r < an.a()) {
        s.on_plate = true;
        s.normal_jump = an.normal_jump();
      }
    }
  }
  s.U = stack_potential(st, p);
  if (!s.on_plate) s.grad = stack_gradient(st, p);
  return s;
}

FieldSample sample(const AnnulusBody& an, const FieldPoint& p) {
  return sample(BodyStack(an), p);
}

}  // namespace

FieldSample sample_field(const Body& body, const FieldPoint& p) {
  require_finite(p);
  return std::visit([&](const auto& b) { return sample(b, p); }, body);
}

double potential(const Body& body, const FieldPoint& p) {
  struct Visitor {
    const FieldPoint& p;
    double operator()(const WireBody& b) const { return wire_potential(b, p); }
    double operator()(const DiskBody& b) const { return disk_potential(b, p); }
    double operator()(const AnnulusBody& b) const { return annulus_potential(b, p); }
    double operator()(const BodyStack& b) const { return stack_potential(b, p); }
  };
  return std::visit(Visitor{p}, body);
}

}  // namespace annulus::potential
