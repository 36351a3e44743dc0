#pragma once

// Brute-force quadrature of the Newtonian integrals over the bodies. Slow,
// but independent of every closed form in potential.hpp.

#include <cstddef>

#include "annulus/bodies.hpp"

namespace annulus::potential {

struct OracleOptions {
  /// Absolute tolerance on the potential.
  double abs_tol = 1e-10;
  /// Absolute tolerance on each gradient component.
  double grad_abs_tol = 1e-12;
  /// Interval budget of every one-dimensional adaptive integration.
  std::size_t max_intervals = 20000;
};

/// Potential by quadrature; edge circles raise SingularityError and an
/// exhausted budget raises ConvergenceError.
double oracle_potential(const WireBody& body, const FieldPoint& p, const OracleOptions& opt = {});
double oracle_potential(const DiskBody& body, const FieldPoint& p, const OracleOptions& opt = {});
double oracle_potential(const AnnulusBody& body, const FieldPoint& p, const OracleOptions& opt = {});
double oracle_potential(const BodyStack& stack, const FieldPoint& p, const OracleOptions& opt = {});

/// Gradient by differentiation under the integral sign; points on a plate
/// raise FieldDiscontinuityError.
Vec3 oracle_gradient(const WireBody& body, const FieldPoint& p, const OracleOptions& opt = {});
Vec3 oracle_gradient(const DiskBody& body, const FieldPoint& p, const OracleOptions& opt = {});
Vec3 oracle_gradient(const AnnulusBody& body, const FieldPoint& p, const OracleOptions& opt = {});
Vec3 oracle_gradient(const BodyStack& stack, const FieldPoint& p, const OracleOptions& opt = {});

}  // namespace annulus::potential
