#include "annulus/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "annulus/errors.hpp"
#include "annulus/potential.hpp"
#include "annulus/quadrature.hpp"

namespace annulus::dynamics {

namespace pot = annulus::potential;

double energy(const BodyStack& stack, const CartesianState& s) {
  const double kinetic = 0.5 * (s.vx * s.vx + s.vy * s.vy + s.vz * s.vz);
  return kinetic + pot::stack_potential(stack, s.position());
}

double energy(const BodyStack& stack, const ReducedState& s) {
  if (!(s.r > 0.0)) throw DomainError("reduced state needs r > 0");
  const double kinetic =
      0.5 * (s.rdot * s.rdot + s.zdot * s.zdot + s.Lambda * s.Lambda / (s.r * s.r));
  return kinetic + pot::stack_potential(stack, {s.r, 0.0, s.z});
}

std::array<double, 6> cartesian_rhs(const BodyStack& stack, const CartesianState& s) {
  const Vec3 g = pot::stack_gradient(stack, s.position());
  return {s.vx, s.vy, s.vz, -g[0], -g[1], -g[2]};
}

std::array<double, 4> reduced_rhs(const BodyStack& stack, const ReducedState& s) {
  if (!(s.r > 0.0)) throw DomainError("reduced equations need r > 0");
  const Vec3 g = pot::stack_gradient(stack, {s.r, 0.0, s.z});
  const double r3 = s.r * s.r * s.r;
  return {s.rdot, -g[0] + s.Lambda * s.Lambda / r3, s.zdot, -g[2]};
}

double axis_accel(const AnnulusBody& body, double z) {
  const double sa = std::hypot(body.a(), z);
  const double sb = std::hypot(body.b(), z);
  return -2.0 * body.mu() * z / (sa * sb * (sa + sb));
}

double centre_energy(const AnnulusBody& body) { return -2.0 * body.mu() / (body.a() + body.b()); }

double axial_turning_point(const AnnulusBody& body, double E) {
  const double e_star = centre_energy(body);
  if (!(E >= e_star && E < 0.0))
    throw DomainError("axial turning point needs E* <= E < 0");
  // U = -2 mu / (sa + sb) = E fixes sa + sb, and sa - sb = (a^2 - b^2)/(sa + sb).
  const double a = body.a();
  const double b = body.b();
  const double sum = -2.0 * body.mu() / E;
  const double sa = 0.5 * (sum + (a - b) * (a + b) / sum);
  const double z2 = (sa - a) * (sa + a);
  return z2 > 0.0 ? std::sqrt(z2) : 0.0;
}

double axial_period(const AnnulusBody& body, double E) {
  const double e_star = centre_energy(body);
  if (!(E > e_star && E < 0.0)) throw DomainError("axial period needs E* < E < 0");
  const double a = body.a();
  const double b = body.b();
  const double zt = axial_turning_point(body, E);
  const double sat = std::hypot(a, zt);
  const double sbt = std::hypot(b, zt);
  // With z = zt sin(theta) the endpoint singularity cancels:
  //   E - U(z) = 2 mu zt^2 cos^2(theta) (1/A_t + 1/A_z) / (S_a S_b),
  // A = sa + sb, S_R = sqrt(R^2 + zt^2) + sqrt(R^2 + z^2).
  auto integrand = [&](double theta) {
    const double z = zt * std::sin(theta);
    const double sa = std::hypot(a, z);
    const double sb = std::hypot(b, z);
    const double Sa = sat + sa;
    const double Sb = sbt + sb;
    const double g = 2.0 * body.mu() * (1.0 / (sat + sbt) + 1.0 / (sa + sb)) / (Sa * Sb);
    return 1.0 / std::sqrt(2.0 * g);
  };
  quadrature::Options qopt{0.0, 1e-14, 2000};
  const auto res = quadrature::integrate(integrand, 0.0, std::numbers::pi / 2.0, qopt);
  if (!res.converged) throw ConvergenceError("axial period quadrature did not converge");
  return 4.0 * res.value;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::TimeLimit:
      return "time-limit";
    case Termination::PlateCollision:
      return "plate-collision";
    case Termination::Escape:
      return "escape";
    case Termination::EdgeProximity:
      return "edge-proximity";
  }
  return "unknown";
}

namespace {

// Adapters giving (r, z) and the integrator state of each state kind.
struct CartesianModel {
  static constexpr std::size_t N = 6;
  using State = CartesianState;
  const BodyStack& stack;

  static double r_of(const std::array<double, N>& y) { return std::hypot(y[0], y[1]); }
  static double z_of(const std::array<double, N>& y) { return y[2]; }
  static double vz_of(const std::array<double, N>& y) { return y[5]; }
  std::array<double, N> pack(const State& s) const { return s.to_array(); }
  State unpack(const std::array<double, N>& y) const { return State::from_array(y); }
  void rhs(const std::array<double, N>& y, std::array<double, N>& f) const {
    const Vec3 g = pot::stack_gradient_unchecked(stack, {y[0], y[1], y[2]});
    f = {y[3], y[4], y[5], -g[0], -g[1], -g[2]};
  }
};

struct ReducedModel {
  static constexpr std::size_t N = 4;
  using State = ReducedState;
  const BodyStack& stack;
  double Lambda;

  static double r_of(const std::array<double, N>& y) { return y[0]; }
  static double z_of(const std::array<double, N>& y) { return y[2]; }
  static double vz_of(const std::array<double, N>& y) { return y[3]; }
  std::array<double, N> pack(const State& s) const { return s.to_array(); }
  State unpack(const std::array<double, N>& y) const { return State::from_array(y, Lambda); }
  void rhs(const std::array<double, N>& y, std::array<double, N>& f) const {
    if (!(y[0] > 0.0)) throw DomainError("reduced equations need r > 0");
    const Vec3 g = pot::stack_gradient_unchecked(stack, {y[0], 0.0, y[2]});
    const double r3 = y[0] * y[0] * y[0];
    f = {y[1], -g[0] + Lambda * Lambda / r3, y[3], -g[2]};
  }
};

double edge_distance(const BodyStack& stack, double r, double z) {
  double d = std::numeric_limits<double>::infinity();
  for (double e : stack.edges()) d = std::min(d, std::hypot(r - e, z));
  return d;
}

// Positive inside the collision band of some plate.
double band_margin(const BodyStack& stack, double r, double eps) {
  double g = -std::numeric_limits<double>::infinity();
  for (const auto& an : stack.annuli())
    g = std::max(g, std::min(r - (an.b() - eps), (an.a() + eps) - r));
  return g;
}

template <class Model>
Trajectory<typename Model::State> run(const Model& model, const BodyStack& stack,
                                      const typename Model::State& s0, double E0,
                                      double t_end, const IntegrationOptions& opt) {
  constexpr std::size_t N = Model::N;
  using Y = std::array<double, N>;
  using State = typename Model::State;

  const Y y0 = model.pack(s0);
  const double r0 = Model::r_of(y0);
  const double z0 = Model::z_of(y0);
  for (const auto& an : stack.annuli())
    if (z0 == 0.0 && r0 >= an.b() && r0 <= an.a())
      throw PreconditionError("initial state lies on a plate");
  const bool planar = z0 == 0.0 && Model::vz_of(y0) == 0.0;
  if (opt.stop_on_edge && !planar && edge_distance(stack, r0, z0) < opt.edge_epsilon)
    throw PreconditionError("initial state lies within the edge tolerance of a plate edge");

  const double r_escape = opt.escape_factor * stack.outer_radius();
  const bool can_escape = opt.stop_on_escape && E0 >= 0.0;

  Trajectory<State> traj;
  traj.samples.push_back({0.0, s0});
  if (t_end == 0.0) return traj;

  ode::Dop853<N> stepper([&model](double, const Y& y, Y& f) { model.rhs(y, f); }, 0.0, y0,
                         opt.ode);
  const double dir = t_end > 0.0 ? 1.0 : -1.0;
  double next_sample = dir * opt.sample_dt;

  // Event functions; each one fires when it becomes positive.
  auto collision_g = [&](const Y& y) {
    return band_margin(stack, Model::r_of(y), opt.collision_epsilon);
  };
  auto escape_g = [&](const Y& y) { return std::hypot(Model::r_of(y), Model::z_of(y)) - r_escape; };
  auto edge_g = [&](const Y& y) {
    return opt.edge_epsilon - edge_distance(stack, Model::r_of(y), Model::z_of(y));
  };

  constexpr int kSub = 8;
  while (stepper.step(t_end)) {
    ++traj.steps;
    const auto& dense = stepper.dense();
    auto at = [&](double t) { return t == stepper.t() ? stepper.y() : dense(t); };
    const double time_tol = opt.event_time_tol * std::max(1.0, std::abs(stepper.t()));

    double t_event = std::numeric_limits<double>::infinity() * dir;
    Termination kind = Termination::TimeLimit;
    auto earlier = [&](double t) { return dir > 0.0 ? t < t_event : t > t_event; };

    Y prev = dense.r[0];
    double t_prev = dense.t_old;
    for (int j = 1; j <= kSub && kind == Termination::TimeLimit; ++j) {
      const double t_cur = j == kSub ? stepper.t() : dense.t_old + dense.h * j / kSub;
      const Y cur = at(t_cur);
      auto consider = [&](auto&& g, Termination what) {
        if (g(prev) <= 0.0 && g(cur) > 0.0) {
          const double t = ode::bisect_time([&](double tt) { return g(at(tt)); }, t_prev, t_cur,
                                            time_tol);
          if (earlier(t)) {
            t_event = t;
            kind = what;
          }
        }
      };
      if (opt.stop_on_collision) {
        if (planar) {
          consider(collision_g, Termination::PlateCollision);
        } else {
          const double za = Model::z_of(prev);
          const double zb = Model::z_of(cur);
          if (za != 0.0 && (zb == 0.0 || (za > 0.0) != (zb > 0.0))) {
            auto zg = [&](double tt) { return Model::z_of(at(tt)) * (za > 0.0 ? -1.0 : 1.0); };
            const double t = ode::bisect_time(zg, t_prev, t_cur, time_tol);
            if (collision_g(at(t)) > 0.0 && earlier(t)) {
              t_event = t;
              kind = Termination::PlateCollision;
            }
          }
        }
      }
      if (can_escape) consider(escape_g, Termination::Escape);
      // In-plane motion can only meet an edge by running into its plate.
      if (opt.stop_on_edge && !planar) consider(edge_g, Termination::EdgeProximity);
      prev = cur;
      t_prev = t_cur;
    }

    const double t_stop = kind == Termination::TimeLimit ? stepper.t() : t_event;
    if (opt.sample_dt > 0.0) {
      while (dir * (next_sample - t_stop) <= 0.0) {
        if (dir * (next_sample - traj.samples.back().t) > 0.0)
          traj.samples.push_back({next_sample, model.unpack(at(next_sample))});
        next_sample += dir * opt.sample_dt;
      }
    }
    if (kind != Termination::TimeLimit) {
      const State s = model.unpack(at(t_event));
      traj.termination = kind;
      traj.event = Sample<State>{t_event, s};
      if (dir * (t_event - traj.samples.back().t) > 0.0) traj.samples.push_back({t_event, s});
      return traj;
    }
    if (opt.sample_dt <= 0.0 || stepper.t() == t_end) {
      if (dir * (stepper.t() - traj.samples.back().t) > 0.0)
        traj.samples.push_back({stepper.t(), model.unpack(stepper.y())});
    }
  }
  return traj;
}

}  // namespace

Trajectory<CartesianState> integrate(const BodyStack& stack, const CartesianState& s0,
                                     double t_end, const IntegrationOptions& opt) {
  CartesianModel model{stack};
  return run(model, stack, s0, energy(stack, s0), t_end, opt);
}

Trajectory<ReducedState> integrate_reduced(const BodyStack& stack, const ReducedState& s0,
                                           double t_end, const IntegrationOptions& opt) {
  if (!(s0.r > 0.0)) throw DomainError("reduced state needs r > 0");
  ReducedModel model{stack, s0.Lambda};
  return run(model, stack, s0, energy(stack, s0), t_end, opt);
}

double effective_potential(const BodyStack& stack, double Lambda, double r) {
  if (r == 0.0 && Lambda == 0.0) return pot::stack_planar_potential(stack, 0.0);
  if (!(r > 0.0)) throw DomainError("effective potential needs r > 0");
  return 0.5 * Lambda * Lambda / (r * r) + pot::stack_planar_potential(stack, r);
}

double W_prime(const BodyStack& stack, double Lambda, double r) {
  if (r == 0.0 && Lambda == 0.0) return pot::stack_planar_derivative(stack, 0.0);
  if (!(r > 0.0)) throw DomainError("effective potential needs r > 0");
  return -Lambda * Lambda / (r * r * r) + pot::stack_planar_derivative(stack, r);
}

EffectivePotentialCurve sample_effective_potential(const BodyStack& stack, double Lambda,
                                                   double r_lo, double r_hi, std::size_t n) {
  if (!(r_lo > 0.0) || !(r_hi >= r_lo) || n == 0)
    throw DomainError("effective potential range needs 0 < r_lo <= r_hi and n > 0");
  EffectivePotentialCurve c;
  c.Lambda = Lambda;
  const auto edges = stack.edges();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = n == 1 ? r_lo : r_lo + (r_hi - r_lo) * static_cast<double>(i) / (n - 1);
    if (std::find(edges.begin(), edges.end(), r) != edges.end()) continue;
    c.r.push_back(r);
    c.W.push_back(effective_potential(stack, Lambda, r));
    c.Wp.push_back(W_prime(stack, Lambda, r));
  }
  return c;
}

namespace {

// Coordinate grid with exact endpoints; symmetric ranges contain 0 exactly.
std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (2.0 * static_cast<double>(i) - static_cast<double>(n - 1)) /
                     static_cast<double>(n - 1);
    g[i] = mid + half * u;
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace

std::vector<PortraitCurve> phase_portrait(const BodyStack& stack, const PortraitRequest& req) {
  if (!(req.hi >= req.lo) || req.samples == 0)
    throw DomainError("portrait range needs lo <= hi and at least one sample");
  const bool axial = req.mode == PortraitMode::Axial;
  if (!axial && !(req.lo > 0.0)) throw DomainError("planar portrait needs r > 0");
  const auto edges = stack.edges();

  // Potential along the portrait coordinate; nullopt where undefined.
  auto V = [&](double x) -> std::optional<double> {
    if (axial) return pot::stack_axis_potential(stack, x);
    if (std::find(edges.begin(), edges.end(), x) != edges.end()) return std::nullopt;
    return effective_potential(stack, req.Lambda, x);
  };

  const auto xs = grid(req.lo, req.hi, req.samples);
  std::vector<PortraitCurve> out;
  for (double E : req.levels) {
    PortraitCurve curve;
    curve.energy = E;
    std::vector<std::array<double, 2>> upper;

    auto flush = [&]() {
      if (upper.empty()) return;
      std::vector<std::array<double, 2>> branch = upper;
      for (auto it = upper.rbegin(); it != upper.rend(); ++it)
        if ((*it)[1] != 0.0) branch.push_back({(*it)[0], -(*it)[1]});
      curve.branches.push_back(std::move(branch));
      upper.clear();
    };
    auto turning = [&](double inside, double outside) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        const auto v = V(mid);
        if (v && E - *v >= 0.0)
          inside = mid;
        else
          outside = mid;
      }
      return inside;
    };

    std::optional<double> prev_x;
    bool prev_in = false;
    for (double x : xs) {
      const auto v = V(x);
      const bool in = v && E - *v >= 0.0;
      const double speed = in ? std::sqrt(2.0 * (E - *v)) : 0.0;
      // A grid point with zero speed is itself the turning point.
      if (in && speed > 0.0 && prev_x && !prev_in && V(*prev_x)) {
        upper.push_back({turning(x, *prev_x), 0.0});
      }
      if (in) {
        if (upper.empty() || upper.back()[0] != x) upper.push_back({x, speed});
      } else if (prev_in) {
        if (v && upper.back()[1] > 0.0) {
          const double tp = turning(*prev_x, x);
          if (tp != upper.back()[0]) upper.push_back({tp, 0.0});
        }
        flush();
      }
      prev_x = x;
      prev_in = in;
    }
    flush();
    out.push_back(std::move(curve));
  }
  return out;
}

}  // namespace annulus::dynamics
