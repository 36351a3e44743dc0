#pragma once

// Attracting bodies: circular wire, solid disk, annulus and stacks of
// concentric annuli. All lengths share one unit; mu = G M.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace annulus {

using Vec3 = std::array<double, 3>;

/// Cartesian field point. The plates lie in z = 0, centred on the z axis.
struct FieldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  /// Distance to the symmetry axis.
  double r() const { return std::hypot(x, y); }
  /// Distance to the origin.
  double R() const { return std::hypot(x, y, z); }
};

/// Builds a finite field point; non-finite components raise DomainError.
FieldPoint make_point(double x, double y, double z);

/// Homogeneous circular wire of radius a.
class WireBody {
 public:
  WireBody(double a, double mu);
  double a() const noexcept { return a_; }
  double mu() const noexcept { return mu_; }

 private:
  double a_;
  double mu_;
};

/// Homogeneous solid disk of radius a.
class DiskBody {
 public:
  DiskBody(double a, double mu);
  double a() const noexcept { return a_; }
  double mu() const noexcept { return mu_; }
  /// G sigma = mu / (pi a^2).
  double surface_density() const noexcept;

 private:
  double a_;
  double mu_;
};

/// Homogeneous annulus with outer radius a and inner radius b.
class AnnulusBody {
 public:
  AnnulusBody(double a, double b, double mu);
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double mu() const noexcept { return mu_; }
  /// G sigma = mu / (pi (a^2 - b^2)).
  double surface_density() const noexcept;
  /// Jump of the normal derivative of U across the plate, 4 pi G sigma.
  double normal_jump() const noexcept;

  friend bool operator==(const AnnulusBody&, const AnnulusBody&) = default;

 private:
  double a_;
  double b_;
  double mu_;
};

/// Concentric, coplanar annuli with pairwise disjoint radial intervals.
/// Members are kept sorted by inner radius.
class BodyStack {
 public:
  explicit BodyStack(std::vector<AnnulusBody> annuli);
  explicit BodyStack(const AnnulusBody& single) : BodyStack(std::vector{single}) {}

  std::span<const AnnulusBody> annuli() const noexcept { return annuli_; }
  std::size_t size() const noexcept { return annuli_.size(); }
  const AnnulusBody& operator[](std::size_t i) const { return annuli_[i]; }

  double outer_radius() const noexcept { return annuli_.back().a(); }
  double total_mu() const noexcept;
  /// All edge radii in increasing order.
  std::vector<double> edges() const;
  /// Member whose closed interval [b, a] contains r, if any.
  const AnnulusBody* member_at(double r) const noexcept;

  friend bool operator==(const BodyStack&, const BodyStack&) = default;

 private:
  std::vector<AnnulusBody> annuli_;
};

using Body = std::variant<WireBody, DiskBody, AnnulusBody, BodyStack>;

}  // namespace annulus
