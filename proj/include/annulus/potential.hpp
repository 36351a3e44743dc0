#pragma once

// Closed-form potentials and gradients of the attracting bodies.
//
// U is the specific potential energy (negative, vanishing at infinity) and
// the gradients are Cartesian (dU/dx, dU/dy, dU/dz); the acceleration of a
// test particle is minus the gradient.

#include <optional>

#include "annulus/bodies.hpp"

namespace annulus::potential {

/// U of the wire; a point on the wire raises SingularityError.
double wire_potential(const WireBody& body, const FieldPoint& p);
Vec3 wire_gradient(const WireBody& body, const FieldPoint& p);

/// Disk potential through the third-kind integral Pi. Kept as a cross-check:
/// it is undefined on the cylinder r = a (DomainError for z != 0,
/// SingularityError on the edge circle).
double disk_potential_naive(const DiskBody& body, const FieldPoint& p);

/// Disk potential through Heuman's lambda; defined everywhere except on the
/// edge circle (r = a, z = 0).
double disk_potential(const DiskBody& body, const FieldPoint& p);
/// Gradient off the plate; on the plate raises FieldDiscontinuityError.
Vec3 disk_gradient(const DiskBody& body, const FieldPoint& p);

double annulus_potential(const AnnulusBody& body, const FieldPoint& p);
/// Gradient off the plate. Points with z = 0 and b <= r <= a raise
/// FieldDiscontinuityError (the edge circles included).
Vec3 annulus_gradient(const AnnulusBody& body, const FieldPoint& p);

/// U(r) in the plane z = 0.
double planar_potential(const AnnulusBody& body, double r);
/// dU/dr in the plane z = 0 for r >= 0 off the edge radii (zero at r = 0).
double planar_radial_derivative(const AnnulusBody& body, double r);
/// U on the symmetry axis, U(0, 0, z).
double axis_potential(const AnnulusBody& body, double z);

double stack_potential(const BodyStack& stack, const FieldPoint& p);
Vec3 stack_gradient(const BodyStack& stack, const FieldPoint& p);
double stack_planar_potential(const BodyStack& stack, double r);
double stack_planar_derivative(const BodyStack& stack, double r);
double stack_axis_potential(const BodyStack& stack, double z);

/// Gradient of the stack that never throws on a plate: the two one-sided
/// normal derivatives are averaged (U_z = 0 at z = 0). Edge circles still
/// raise SingularityError. Intended for integrators that detect plate
/// crossings through events.
Vec3 stack_gradient_unchecked(const BodyStack& stack, const FieldPoint& p);

/// Potential, gradient and validity flags at one point.
struct FieldSample {
  std::optional<double> U;
  std::optional<Vec3> grad;
  bool on_plate = false;
  bool on_edge = false;
  /// 4 pi G sigma of the plate under the point, when on_plate.
  std::optional<double> normal_jump;
};

FieldSample sample_field(const Body& body, const FieldPoint& p);

/// Potential of any body kind.
double potential(const Body& body, const FieldPoint& p);

}  // namespace annulus::potential
