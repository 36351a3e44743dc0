#pragma once

// Critical points of the effective potential, linear stability of the
// origin, the circular-orbit bifurcation and circular-orbit monodromy.

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "annulus/bodies.hpp"

namespace annulus::equilibria {

enum class CriticalKind { StableMin, UnstableMax, Degenerate };
enum class Region { Hole, PlateInterior, Gap, Exterior };

std::string_view to_string(CriticalKind k);
std::string_view to_string(Region r);

/// Region of the plane z = 0 containing radius r.
Region region_of(const BodyStack& stack, double r);

struct EquilibriumReport {
  double r0 = 0.0;
  double Lambda = 0.0;
  /// |W'(r0)|.
  double residual = 0.0;
  /// W''(r0).
  double curvature = 0.0;
  CriticalKind kind = CriticalKind::Degenerate;
  Region region = Region::Hole;
  /// Radii at which W' has opposite signs (equal when W' vanishes exactly).
  std::optional<std::pair<double, double>> bracket;
  std::vector<std::complex<double>> eigenvalues;
  /// How r0 was obtained: "bisection" or "symmetry-limit".
  std::string method;
};

struct ScanOptions {
  /// Uniform points per bounded region and log points in the exterior.
  std::size_t interior_points = 200;
  std::size_t exterior_points = 400;
  /// Geometric refinement toward each edge: points at e (1 +- 2^-j).
  int edge_levels = 52;
};

/// Length and force scales used for tolerances: sum of mu over the outer
/// radius squared, and the outer radius.
double force_scale(const BodyStack& stack);

/// All critical points of W on (0, r_max) in the plane z = 0, ordered by
/// radius. At Lambda = 0 the origin is included as a symmetry limit.
std::vector<EquilibriumReport> find_planar_critical_points(const BodyStack& stack, double Lambda,
                                                           double r_max,
                                                           const ScanOptions& opt = {});

/// Critical points lying in the gaps between consecutive annuli. Each gap
/// must hold an odd number of them; otherwise ConvergenceError is raised.
std::vector<EquilibriumReport> gap_equilibria(const BodyStack& stack, double Lambda,
                                              const ScanOptions& opt = {});

/// W''(r) by Richardson-extrapolated central differences of W'.
double W_second(const BodyStack& stack, double Lambda, double r);

struct OriginSpectrum {
  /// Hessian of U at the origin.
  std::array<std::array<double, 3>, 3> hessian{};
  /// Eigenvalues of the 6x6 linearisation, sorted by (real, imag).
  std::vector<std::complex<double>> eigenvalues;
  bool spectrally_stable = false;
};

/// Hessian of U at a point by Richardson-extrapolated central differences
/// of the gradient, with base step h.
std::array<std::array<double, 3>, 3> hessian(const BodyStack& stack, const FieldPoint& p,
                                             double h);

OriginSpectrum origin_spectrum(const BodyStack& stack);

/// sqrt(8 mu a^3 / (pi (a^2 - b^2))); above it W has at least two
/// exterior critical points.
double sufficient_lambda(const AnnulusBody& body);
/// Solid-disk form of the bound (b = 0).
double sufficient_lambda(const DiskBody& body);

/// Number of exterior critical points of W at Lambda.
std::size_t exterior_count(const BodyStack& stack, double Lambda, double r_max);

struct BifurcationResult {
  /// Analytic sufficient bound; present for single-annulus stacks.
  std::optional<double> lambda_sufficient;
  double lambda_star = 0.0;
  /// Final bisection bracket (no exterior roots at first, some at second).
  std::pair<double, double> bracket{};
  std::size_t count_low = 0;
  std::size_t count_high = 0;
};

/// Bisects on the exterior critical-point count until the bracket is at
/// most tol wide. Equal counts at both ends raise BracketError.
BifurcationResult bifurcation_lambda(const BodyStack& stack, double lambda_low,
                                     double lambda_high, double tol = 1e-8);

struct MonodromyResult {
  double period = 0.0;
  /// Absent when the entries overflow double precision.
  std::optional<std::array<std::array<double, 6>, 6>> matrix;
  /// Sorted by (real, imag). Empty when the entries exceed 1e8, where the
  /// small eigenvalues are lost to rounding.
  std::vector<std::complex<double>> eigenvalues;
  /// log |eigenvalue|, largest first. Without eigenvalues they come from
  /// QR sweeps over the renormalised segments.
  std::vector<double> log_moduli;
  /// Product of the segment determinants.
  double determinant = 0.0;
  std::size_t segments = 0;
  bool spectrally_stable = false;
};

/// Monodromy of the circular orbit of radius r0 with angular momentum
/// Lambda over one period 2 pi r0^2 / Lambda. The variational equations are
/// integrated along the exact circle. (r0, Lambda) must satisfy the
/// circular-orbit condition to within the resolution of r0, otherwise
/// PreconditionError is raised.
MonodromyResult circular_orbit_monodromy(const BodyStack& stack, double r0, double Lambda);

/// Angular momentum of the circular orbit of radius r0, sqrt(r0^3 U'(r0)).
double circular_lambda(const BodyStack& stack, double r0);

}  // namespace annulus::equilibria
