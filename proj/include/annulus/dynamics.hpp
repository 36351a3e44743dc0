#pragma once

// Motion of a test particle in the field of a stack of annuli.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "annulus/bodies.hpp"
#include "annulus/ode.hpp"

namespace annulus::dynamics {

struct CartesianState {
  double x = 0.0, y = 0.0, z = 0.0;
  double vx = 0.0, vy = 0.0, vz = 0.0;

  std::array<double, 6> to_array() const { return {x, y, z, vx, vy, vz}; }
  static CartesianState from_array(const std::array<double, 6>& s) {
    return {s[0], s[1], s[2], s[3], s[4], s[5]};
  }
  FieldPoint position() const { return {x, y, z}; }
  /// Axial component of the specific angular momentum, x vy - y vx.
  double angular_momentum() const { return x * vy - y * vx; }
};

/// Cylindrical state with the azimuth eliminated through the conserved
/// angular momentum Lambda = r^2 dlambda/dt.
struct ReducedState {
  double r = 0.0;
  double rdot = 0.0;
  double z = 0.0;
  double zdot = 0.0;
  double Lambda = 0.0;

  std::array<double, 4> to_array() const { return {r, rdot, z, zdot}; }
  static ReducedState from_array(const std::array<double, 4>& s, double Lambda) {
    return {s[0], s[1], s[2], s[3], Lambda};
  }
};

double energy(const BodyStack& stack, const CartesianState& s);
double energy(const BodyStack& stack, const ReducedState& s);

/// (vx, vy, vz, -Ux, -Uy, -Uz). Points on a plate raise FieldDiscontinuityError.
std::array<double, 6> cartesian_rhs(const BodyStack& stack, const CartesianState& s);
/// (rdot, -dU/dr + Lambda^2 / r^3, zdot, -dU/dz). r <= 0 raises DomainError.
std::array<double, 4> reduced_rhs(const BodyStack& stack, const ReducedState& s);

/// z'' on the symmetry axis of a single annulus.
double axis_accel(const AnnulusBody& body, double z);
/// Potential energy at the centre, E* = -2 mu / (a + b).
double centre_energy(const AnnulusBody& body);
/// Positive z with U(0, 0, z) = E, for E* <= E < 0.
double axial_turning_point(const AnnulusBody& body, double E);
/// Period of the axial oscillation with energy E in (E*, 0).
double axial_period(const AnnulusBody& body, double E);

enum class Termination { TimeLimit, PlateCollision, Escape, EdgeProximity };
std::string_view to_string(Termination t);

struct IntegrationOptions {
  ode::Options ode{};
  /// Sample spacing of the returned trajectory; 0 records every step.
  double sample_dt = 0.0;
  double collision_epsilon = 1e-9;
  double edge_epsilon = 1e-6;
  /// Escape radius in units of the outermost plate radius.
  double escape_factor = 50.0;
  /// Time resolution of event localisation.
  double event_time_tol = 1e-12;
  bool stop_on_collision = true;
  bool stop_on_escape = true;
  bool stop_on_edge = true;
};

template <class State>
struct Sample {
  double t;
  State state;
};

template <class State>
struct Trajectory {
  std::vector<Sample<State>> samples;
  Termination termination = Termination::TimeLimit;
  /// Time and state of the terminating event, if any.
  std::optional<Sample<State>> event;
  std::size_t steps = 0;
};

/// Integrates the Cartesian equations from t = 0 to t_end (which may be
/// negative). The initial point must be off the plates.
Trajectory<CartesianState> integrate(const BodyStack& stack, const CartesianState& s0,
                                     double t_end, const IntegrationOptions& opt = {});
Trajectory<ReducedState> integrate_reduced(const BodyStack& stack, const ReducedState& s0,
                                           double t_end, const IntegrationOptions& opt = {});

/// W(r) = Lambda^2 / (2 r^2) + U(r, 0). r = 0 is allowed only for Lambda = 0.
double effective_potential(const BodyStack& stack, double Lambda, double r);
/// W'(r) = -Lambda^2 / r^3 + U'(r, 0).
double W_prime(const BodyStack& stack, double Lambda, double r);

struct EffectivePotentialCurve {
  double Lambda = 0.0;
  std::vector<double> r;
  std::vector<double> W;
  std::vector<double> Wp;
};

/// Samples W and W' on r in [r_lo, r_hi] (n points), skipping edge radii.
EffectivePotentialCurve sample_effective_potential(const BodyStack& stack, double Lambda,
                                                   double r_lo, double r_hi, std::size_t n);

enum class PortraitMode { Axial, Planar };

struct PortraitRequest {
  PortraitMode mode = PortraitMode::Axial;
  double Lambda = 0.0;
  /// Coordinate range: z for the axial portrait, r for the planar one.
  double lo = -2.0;
  double hi = 2.0;
  std::size_t samples = 401;
  std::vector<double> levels;
};

/// One level curve: each branch is a closed polyline running along the
/// upper half (positive velocity) and back along the lower half.
struct PortraitCurve {
  double energy = 0.0;
  std::vector<std::vector<std::array<double, 2>>> branches;
};

std::vector<PortraitCurve> phase_portrait(const BodyStack& stack, const PortraitRequest& req);

}  // namespace annulus::dynamics
