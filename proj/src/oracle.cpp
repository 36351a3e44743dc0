#include "annulus/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "annulus/errors.hpp"
#include "annulus/quadrature.hpp"

namespace annulus::potential {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Kernel { Potential, Radial, Axial };

// Integrand over theta in [0, pi] for a ring of radius rho seen from (r, z).
// Distances use the sin^2(theta/2) form, which keeps D accurate near theta = 0.
double ring_kernel(Kernel k, double rho, double r, double z, double theta) {
  const double s = std::sin(0.5 * theta);
  const double near = (rho - r) * (rho - r) + z * z;
  const double d2 = near + 4.0 * rho * r * s * s;
  const double d = std::sqrt(d2);
  switch (k) {
    case Kernel::Potential:
      return 1.0 / d;
    case Kernel::Radial:
      return ((r - rho) + 2.0 * rho * s * s) / (d2 * d);
    case Kernel::Axial:
      return 1.0 / (d2 * d);
  }
  return 0.0;
}

// Breakpoints on [0, pi] that bracket the peak at theta = 0, whose width is
// about delta / sqrt(rho r).
std::vector<double> theta_points(double rho, double r, double z) {
  std::vector<double> pts{0.0};
  const double rr = rho * r;
  if (rr > 0.0) {
    double w = std::hypot(rho - r, z) / std::sqrt(rr);
    for (; w < kPi; w *= 4.0) pts.push_back(w);
  }
  pts.push_back(kPi);
  return pts;
}

double ring_integral(Kernel k, double rho, double r, double z, double tol,
                     std::size_t budget) {
  const auto pts = theta_points(rho, r, z);
  quadrature::Options opt{tol, 1e-15, budget};
  const auto res = quadrature::integrate(
      [&](double t) { return ring_kernel(k, rho, r, z, t); }, std::span<const double>(pts), opt);
  if (!res.converged)
    throw ConvergenceError("quadrature oracle: ring integral did not converge");
  return res.value;
}

// Integral over rho in [rho0, rho1] of rho * ring_integral.
double plate_integral(Kernel k, double rho0, double rho1, double r, double z, double tol,
                      std::size_t budget) {
  std::vector<double> pts{rho0};
  const double az = std::abs(z);
  for (double c : {r - az, r, r + az})
    if (c > rho0 && c < rho1) pts.push_back(c);
  pts.push_back(rho1);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const double inner_tol = 0.25 * tol / (rho1 * (rho1 - rho0));
  quadrature::Options opt{0.5 * tol, 1e-15, budget};
  const auto res = quadrature::integrate(
      [&](double rho) { return rho * ring_integral(k, rho, r, z, inner_tol, budget); },
      std::span<const double>(pts), opt);
  if (!res.converged)
    throw ConvergenceError("quadrature oracle: radial integral did not converge");
  return res.value;
}

void reject_edges(std::initializer_list<double> radii, double r, double z) {
  for (double R : radii)
    if (z == 0.0 && r == R) throw SingularityError("oracle evaluated on an edge circle");
}

void require_finite(const FieldPoint& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
    throw DomainError("field point must have finite coordinates");
}

Vec3 to_cartesian(const FieldPoint& p, double dr, double dz) {
  const double r = p.r();
  if (r == 0.0) return {0.0, 0.0, dz};
  return {dr * p.x / r, dr * p.y / r, dz};
}

// Uniform plate of density G sigma between rho0 and rho1.
double plate_potential(double gs, double rho0, double rho1, const FieldPoint& p,
                       const OracleOptions& opt) {
  const double c = 2.0 * gs;
  return -c * plate_integral(Kernel::Potential, rho0, rho1, p.r(), p.z, opt.abs_tol / c,
                             opt.max_intervals);
}

Vec3 plate_gradient(double gs, double rho0, double rho1, const FieldPoint& p,
                    const OracleOptions& opt) {
  const double r = p.r();
  if (p.z == 0.0 && r >= rho0 && r <= rho1)
    throw FieldDiscontinuityError("oracle gradient requested on a plate", 4.0 * kPi * gs);
  const double c = 2.0 * gs;
  const double tol = opt.grad_abs_tol / c;
  const double dr =
      r > 0.0 ? c * plate_integral(Kernel::Radial, rho0, rho1, r, p.z, tol, opt.max_intervals)
              : 0.0;
  const double dz =
      p.z != 0.0
          ? c * p.z *
                plate_integral(Kernel::Axial, rho0, rho1, r, p.z, tol / std::abs(p.z),
                               opt.max_intervals)
          : 0.0;
  return to_cartesian(p, dr, dz);
}

}  // namespace

double oracle_potential(const WireBody& body, const FieldPoint& p, const OracleOptions& opt) {
  require_finite(p);
  const double r = p.r();
  reject_edges({body.a()}, r, p.z);
  const double c = body.mu() / kPi;
  return -c * ring_integral(Kernel::Potential, body.a(), r, p.z, opt.abs_tol / c,
                            opt.max_intervals);
}

Vec3 oracle_gradient(const WireBody& body, const FieldPoint& p, const OracleOptions& opt) {
  require_finite(p);
  const double r = p.r();
  reject_edges({body.a()}, r, p.z);
  const double c = body.mu() / kPi;
  const double tol = opt.grad_abs_tol / c;
  const double dr =
      r > 0.0 ? c * ring_integral(Kernel::Radial, body.a(), r, p.z, tol, opt.max_intervals)
              : 0.0;
  const double dz =
      p.z != 0.0 ? c * p.z *
                       ring_integral(Kernel::Axial, body.a(), r, p.z, tol / std::abs(p.z),
                                     opt.max_intervals)
                 : 0.0;
  return to_cartesian(p, dr, dz);
}

double oracle_potential(const DiskBody& body, const FieldPoint& p, const OracleOptions& opt) {
  require_finite(p);
  reject_edges({body.a()}, p.r(), p.z);
  return plate_potential(body.surface_density(), 0.0, body.a(), p, opt);
}

Vec3 oracle_gradient(const DiskBody& body, const FieldPoint& p, const OracleOptions& opt) {
  require_finite(p);
  return plate_gradient(body.surface_density(), 0.0, body.a(), p, opt);
}

double oracle_potential(const AnnulusBody& body, const FieldPoint& p,
                        const OracleOptions& opt) {
  require_finite(p);
  reject_edges({body.a(), body.b()}, p.r(), p.z);
  return plate_potential(body.surface_density(), body.b(), body.a(), p, opt);
}

Vec3 oracle_gradient(const AnnulusBody& body, const FieldPoint& p, const OracleOptions& opt) {
  require_finite(p);
  return plate_gradient(body.surface_density(), body.b(), body.a(), p, opt);
}

double oracle_potential(const BodyStack& stack, const FieldPoint& p, const OracleOptions& opt) {
  OracleOptions each = opt;
  each.abs_tol = opt.abs_tol / static_cast<double>(stack.size());
  double u = 0.0;
  for (const auto& an : stack.annuli()) u += oracle_potential(an, p, each);
  return u;
}

Vec3 oracle_gradient(const BodyStack& stack, const FieldPoint& p, const OracleOptions& opt) {
  OracleOptions each = opt;
  each.grad_abs_tol = opt.grad_abs_tol / static_cast<double>(stack.size());
  Vec3 g{0.0, 0.0, 0.0};
  for (const auto& an : stack.annuli()) {
    const Vec3 m = oracle_gradient(an, p, each);
    for (int i = 0; i < 3; ++i) g[i] += m[i];
  }
  return g;
}

}  // namespace annulus::potential
