#include "annulus/bodies.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <utility>

#include "annulus/errors.hpp"

namespace annulus {

namespace {

void require_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0.0))
    throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

FieldPoint make_point(double x, double y, double z) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
    throw DomainError("field point must have finite coordinates");
  return {x, y, z};
}

WireBody::WireBody(double a, double mu) : a_(a), mu_(mu) {
  require_positive(a, "wire radius");
  require_positive(mu, "wire mu");
}

DiskBody::DiskBody(double a, double mu) : a_(a), mu_(mu) {
  require_positive(a, "disk radius");
  require_positive(mu, "disk mu");
}

double DiskBody::surface_density() const noexcept {
  return mu_ / (std::numbers::pi * a_ * a_);
}

AnnulusBody::AnnulusBody(double a, double b, double mu) : a_(a), b_(b), mu_(mu) {
  require_positive(a, "outer radius");
  require_positive(b, "inner radius");
  require_positive(mu, "annulus mu");
  if (!(b < a)) throw DomainError("annulus needs inner radius < outer radius");
}

double AnnulusBody::surface_density() const noexcept {
  return mu_ / (std::numbers::pi * (a_ - b_) * (a_ + b_));
}

double AnnulusBody::normal_jump() const noexcept {
  return 4.0 * std::numbers::pi * surface_density();
}

BodyStack::BodyStack(std::vector<AnnulusBody> annuli) : annuli_(std::move(annuli)) {
  if (annuli_.empty()) throw DomainError("body stack needs at least one annulus");
  std::sort(annuli_.begin(), annuli_.end(),
            [](const AnnulusBody& l, const AnnulusBody& r) { return l.b() < r.b(); });
  for (std::size_t i = 1; i < annuli_.size(); ++i) {
    if (!(annuli_[i - 1].a() < annuli_[i].b()))
      throw DomainError("annuli in a stack must have disjoint radial intervals");
  }
}

double BodyStack::total_mu() const noexcept {
  double s = 0.0;
  for (const auto& an : annuli_) s += an.mu();
  return s;
}

std::vector<double> BodyStack::edges() const {
  std::vector<double> out;
  out.reserve(2 * annuli_.size());
  for (const auto& an : annuli_) {
    out.push_back(an.b());
    out.push_back(an.a());
  }
  return out;
}

const AnnulusBody* BodyStack::member_at(double r) const noexcept {
  for (const auto& an : annuli_)
    if (r >= an.b() && r <= an.a()) return &an;
  return nullptr;
}

}  // namespace annulus
