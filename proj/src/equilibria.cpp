#include "annulus/equilibria.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "annulus/dynamics.hpp"
#include "annulus/errors.hpp"
#include "annulus/ode.hpp"
#include "annulus/potential.hpp"

namespace annulus::equilibria {

namespace pot = annulus::potential;
using dynamics::W_prime;

std::string_view to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::StableMin:
      return "stable-min";
    case CriticalKind::UnstableMax:
      return "unstable-max";
    case CriticalKind::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Hole:
      return "hole";
    case Region::PlateInterior:
      return "plate-interior";
    case Region::Gap:
      return "gap";
    case Region::Exterior:
      return "exterior";
  }
  return "unknown";
}

Region region_of(const BodyStack& stack, double r) {
  const auto members = stack.annuli();
  if (r < members.front().b()) return Region::Hole;
  if (r > members.back().a()) return Region::Exterior;
  for (const auto& an : members)
    if (r >= an.b() && r <= an.a()) return Region::PlateInterior;
  return Region::Gap;
}

double force_scale(const BodyStack& stack) {
  const double a = stack.outer_radius();
  return stack.total_mu() / (a * a);
}

namespace {

double edge_clearance(const BodyStack& stack, double r) {
  double d = r;
  for (double e : stack.edges()) d = std::min(d, std::abs(r - e));
  return d;
}

CriticalKind classify(const BodyStack& stack, double curvature) {
  const double a = stack.outer_radius();
  const double threshold = 1e-8 * stack.total_mu() / (a * a * a);
  if (std::abs(curvature) <= threshold) return CriticalKind::Degenerate;
  return curvature > 0.0 ? CriticalKind::StableMin : CriticalKind::UnstableMax;
}

std::vector<std::complex<double>> radial_eigenvalues(double curvature) {
  const std::complex<double> root = std::sqrt(std::complex<double>(-curvature, 0.0));
  return {-root, root};
}

// Scan points strictly inside (lo, hi); hi itself is kept when it is not an
// edge (the exterior scan ends at r_max).
std::vector<double> scan_grid(double lo, double hi, bool lo_edge, bool hi_edge, bool log_spacing,
                              const ScanOptions& opt) {
  std::vector<double> g;
  for (int j = 1; j <= opt.edge_levels; ++j) {
    const double t = std::ldexp(1.0, -j);
    if (lo_edge) g.push_back(lo * (1.0 + t));
    if (hi_edge) g.push_back(hi * (1.0 - t));
    if (lo == 0.0) g.push_back(hi * t);
  }
  const std::size_t n = log_spacing ? opt.exterior_points : opt.interior_points;
  for (std::size_t k = 1; k <= n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n + 1);
    g.push_back(log_spacing ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u);
  }
  if (!hi_edge) g.push_back(hi);
  std::erase_if(g, [&](double r) { return !(r > lo && (r < hi || (!hi_edge && r == hi))); });
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

struct Root {
  double lo;
  double hi;
};

// Shrinks a sign-change bracket of W' to adjacent doubles.
Root bisect_root(const BodyStack& stack, double Lambda, double lo, double hi) {
  double flo = W_prime(stack, Lambda, lo);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = W_prime(stack, Lambda, mid);
    if (fm == 0.0) return {mid, mid};
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

// Minimum of f on [lo, hi] by golden-section search.
template <class F>
double golden_min(F&& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

EquilibriumReport make_report(const BodyStack& stack, double Lambda, Root root) {
  EquilibriumReport rep;
  const double wlo = std::abs(W_prime(stack, Lambda, root.lo));
  const double whi = std::abs(W_prime(stack, Lambda, root.hi));
  rep.r0 = wlo <= whi ? root.lo : root.hi;
  rep.Lambda = Lambda;
  rep.residual = std::min(wlo, whi);
  rep.curvature = W_second(stack, Lambda, rep.r0);
  rep.kind = classify(stack, rep.curvature);
  rep.region = region_of(stack, rep.r0);
  rep.bracket = std::pair{root.lo, root.hi};
  rep.eigenvalues = radial_eigenvalues(rep.curvature);
  rep.method = "bisection";
  return rep;
}

std::vector<Root> roots_on(const BodyStack& stack, double Lambda, const std::vector<double>& g) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = W_prime(stack, Lambda, g[i]);

  std::vector<Root> roots;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (w[i] == 0.0) {
      roots.push_back({g[i], g[i]});
      continue;
    }
    if (i > 0 && w[i - 1] != 0.0 && (w[i - 1] > 0.0) != (w[i] > 0.0))
      roots.push_back(bisect_root(stack, Lambda, g[i - 1], g[i]));
    // A dip of |W'| between same-sign neighbours may hide a close root pair.
    if (i > 0 && i + 1 < g.size() && w[i - 1] != 0.0 && w[i + 1] != 0.0 &&
        (w[i - 1] > 0.0) == (w[i] > 0.0) && (w[i + 1] > 0.0) == (w[i] > 0.0) &&
        std::abs(w[i]) <= std::abs(w[i - 1]) && std::abs(w[i]) <= std::abs(w[i + 1])) {
      const double s = w[i] > 0.0 ? 1.0 : -1.0;
      auto f = [&](double r) { return s * W_prime(stack, Lambda, r); };
      const double rm = golden_min(f, g[i - 1], g[i + 1]);
      const double fm = f(rm);
      if (fm == 0.0) {
        roots.push_back({rm, rm});
      } else if (fm < 0.0) {
        roots.push_back(bisect_root(stack, Lambda, g[i - 1], rm));
        roots.push_back(bisect_root(stack, Lambda, rm, g[i + 1]));
      }
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Root& l, const Root& r) { return l.lo < r.lo; });
  std::vector<Root> unique;
  for (const auto& r : roots)
    if (unique.empty() || r.lo > unique.back().hi + 1e-10 * r.hi) unique.push_back(r);
  return unique;
}

struct Interval {
  double lo;
  double hi;
  Region region;
};

std::vector<Interval> regions(const BodyStack& stack, double r_max) {
  std::vector<Interval> out;
  const auto members = stack.annuli();
  out.push_back({0.0, members.front().b(), Region::Hole});
  for (std::size_t i = 0; i < members.size(); ++i) {
    out.push_back({members[i].b(), members[i].a(), Region::PlateInterior});
    if (i + 1 < members.size()) out.push_back({members[i].a(), members[i + 1].b(), Region::Gap});
  }
  out.push_back({members.back().a(), r_max, Region::Exterior});
  return out;
}

std::vector<EquilibriumReport> scan(const BodyStack& stack, double Lambda,
                                    const Interval& iv, const ScanOptions& opt) {
  const bool exterior = iv.region == Region::Exterior;
  const auto g = scan_grid(iv.lo, iv.hi, iv.lo > 0.0, !exterior, exterior, opt);
  std::vector<EquilibriumReport> out;
  for (const auto& root : roots_on(stack, Lambda, g)) out.push_back(make_report(stack, Lambda, root));
  return out;
}

// U_rr at the origin, the limit of U'(r)/r.
double origin_curvature(const BodyStack& stack) {
  const double h = 1e-3 * stack.annuli().front().b();
  auto c = [&](double r) { return pot::stack_planar_derivative(stack, r) / r; };
  return (4.0 * c(0.5 * h) - c(h)) / 3.0;
}

}  // namespace

double W_second(const BodyStack& stack, double Lambda, double r) {
  const double h = std::min(1e-4 * r, 0.25 * edge_clearance(stack, r));
  auto D = [&](double step) {
    return (W_prime(stack, Lambda, r + step) - W_prime(stack, Lambda, r - step)) / (2.0 * step);
  };
  return (4.0 * D(0.5 * h) - D(h)) / 3.0;
}

std::vector<EquilibriumReport> find_planar_critical_points(const BodyStack& stack, double Lambda,
                                                           double r_max,
                                                           const ScanOptions& opt) {
  if (!(Lambda >= 0.0) || !std::isfinite(Lambda))
    throw DomainError("angular momentum must be non-negative");
  if (!(r_max > stack.outer_radius()))
    throw DomainError("scan radius must exceed the outermost plate radius");

  std::vector<EquilibriumReport> out;
  if (Lambda == 0.0) {
    EquilibriumReport origin;
    origin.r0 = 0.0;
    origin.Lambda = 0.0;
    origin.residual = 0.0;
    origin.curvature = origin_curvature(stack);
    origin.kind = classify(stack, origin.curvature);
    origin.region = Region::Hole;
    origin.bracket = std::pair{0.0, 0.0};
    origin.eigenvalues = radial_eigenvalues(origin.curvature);
    origin.method = "symmetry-limit";
    out.push_back(std::move(origin));
  }
  for (const auto& iv : regions(stack, r_max)) {
    auto found = scan(stack, Lambda, iv, opt);
    out.insert(out.end(), std::make_move_iterator(found.begin()),
               std::make_move_iterator(found.end()));
  }
  return out;
}

std::vector<EquilibriumReport> gap_equilibria(const BodyStack& stack, double Lambda,
                                              const ScanOptions& opt) {
  if (stack.size() < 2) throw PreconditionError("gap equilibria need at least two annuli");
  if (!(Lambda >= 0.0) || !std::isfinite(Lambda))
    throw DomainError("angular momentum must be non-negative");
  std::vector<EquilibriumReport> out;
  for (const auto& iv : regions(stack, 2.0 * stack.outer_radius())) {
    if (iv.region != Region::Gap) continue;
    auto found = scan(stack, Lambda, iv, opt);
    if (found.size() % 2 == 0)
      throw ConvergenceError("gap scan found an even number of critical points");
    out.insert(out.end(), std::make_move_iterator(found.begin()),
               std::make_move_iterator(found.end()));
  }
  return out;
}

std::array<std::array<double, 3>, 3> hessian(const BodyStack& stack, const FieldPoint& p,
                                             double h) {
  auto grad = [&](int j, double step) {
    FieldPoint q = p;
    (j == 0 ? q.x : j == 1 ? q.y : q.z) += step;
    return pot::stack_gradient_unchecked(stack, q);
  };
  std::array<std::array<double, 3>, 3> H{};
  for (int j = 0; j < 3; ++j) {
    const Vec3 p1 = grad(j, h), m1 = grad(j, -h);
    const Vec3 p2 = grad(j, 0.5 * h), m2 = grad(j, -0.5 * h);
    for (int i = 0; i < 3; ++i) {
      const double d1 = (p1[i] - m1[i]) / (2.0 * h);
      const double d2 = (p2[i] - m2[i]) / h;
      H[i][j] = (4.0 * d2 - d1) / 3.0;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) H[i][j] = H[j][i] = 0.5 * (H[i][j] + H[j][i]);
  return H;
}

namespace {

std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue iteration failed");
  std::vector<std::complex<double>> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](const auto& l, const auto& r) {
    return l.real() != r.real() ? l.real() < r.real() : l.imag() < r.imag();
  });
  return ev;
}

}  // namespace

OriginSpectrum origin_spectrum(const BodyStack& stack) {
  OriginSpectrum out;
  out.hessian = hessian(stack, {0.0, 0.0, 0.0}, 1e-4 * stack.annuli().front().b());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    A(i, i + 3) = 1.0;
    for (int j = 0; j < 3; ++j) A(i + 3, j) = -out.hessian[i][j];
  }
  out.eigenvalues = sorted_eigenvalues(A);
  double largest = 0.0;
  double worst_real = 0.0;
  for (const auto& ev : out.eigenvalues) {
    largest = std::max(largest, std::abs(ev));
    worst_real = std::max(worst_real, std::abs(ev.real()));
  }
  out.spectrally_stable = worst_real <= 1e-6 * largest;
  return out;
}

double sufficient_lambda(const AnnulusBody& body) {
  const double a = body.a();
  const double b = body.b();
  return std::sqrt(8.0 * body.mu() * a * a * a / (std::numbers::pi * (a - b) * (a + b)));
}

double sufficient_lambda(const DiskBody& body) {
  return std::sqrt(8.0 * body.mu() * body.a() / std::numbers::pi);
}

std::size_t exterior_count(const BodyStack& stack, double Lambda, double r_max) {
  const auto iv = regions(stack, r_max).back();
  return scan(stack, Lambda, iv, {}).size();
}

BifurcationResult bifurcation_lambda(const BodyStack& stack, double lambda_low,
                                     double lambda_high, double tol) {
  if (!(lambda_low >= 0.0) || !(lambda_high > lambda_low) || !(tol > 0.0))
    throw DomainError("bifurcation search needs 0 <= low < high and tol > 0");
  // The outer exterior root sits near Lambda^2 / mu.
  const double r_max = std::max(50.0 * stack.outer_radius(),
                                20.0 * lambda_high * lambda_high / stack.total_mu());
  BifurcationResult res;
  res.count_low = exterior_count(stack, lambda_low, r_max);
  res.count_high = exterior_count(stack, lambda_high, r_max);
  if (res.count_low == res.count_high)
    throw BracketError("bifurcation bracket has the same exterior count at both ends");
  double lo = lambda_low;
  double hi = lambda_high;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (exterior_count(stack, mid, r_max) == res.count_low)
      lo = mid;
    else
      hi = mid;
  }
  res.bracket = {lo, hi};
  res.lambda_star = 0.5 * (lo + hi);
  if (stack.size() == 1) res.lambda_sufficient = sufficient_lambda(stack[0]);
  return res;
}

double circular_lambda(const BodyStack& stack, double r0) {
  const double up = pot::stack_planar_derivative(stack, r0);
  if (!(up > 0.0)) throw DomainError("no circular orbit: the attraction at r0 points outward");
  return std::sqrt(r0 * r0 * r0 * up);
}

namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;

// log |eigenvalue| of the product segs.back() * ... * segs.front(), by
// repeated QR sweeps through the factors.
std::vector<double> product_log_moduli(const std::vector<Mat6>& segs) {
  Mat6 Q = Mat6::Identity();
  Eigen::Matrix<double, 6, 1> sums = Eigen::Matrix<double, 6, 1>::Zero();
  for (int sweep = 0; sweep < 12; ++sweep) {
    sums.setZero();
    for (const auto& S : segs) {
      Eigen::HouseholderQR<Mat6> qr(S * Q);
      Q = qr.householderQ();
      const Mat6 R = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int i = 0; i < 6; ++i) sums(i) += std::log(std::abs(R(i, i)));
    }
  }
  std::vector<double> out(sums.begin(), sums.end());
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Drops the two entries nearest the trivial pair (eigenvalue 1, log 0).
template <class T, class Dist>
std::vector<T> drop_trivial_pair(std::vector<T> v, Dist dist) {
  for (int k = 0; k < 2 && !v.empty(); ++k)
    v.erase(std::min_element(v.begin(), v.end(),
                             [&](const T& l, const T& r) { return dist(l) < dist(r); }));
  return v;
}

}  // namespace

MonodromyResult circular_orbit_monodromy(const BodyStack& stack, double r0, double Lambda) {
  if (!(r0 > 0.0) || !(Lambda > 0.0) || !std::isfinite(r0) || !std::isfinite(Lambda))
    throw PreconditionError("circular orbit needs r0 > 0 and Lambda > 0");
  if (region_of(stack, r0) == Region::PlateInterior)
    throw PreconditionError("circular orbit radius lies on a plate");
  const double mismatch = std::abs(W_prime(stack, Lambda, r0));
  const double resolution = 64.0 * std::numeric_limits<double>::epsilon() * r0 *
                            std::abs(W_second(stack, Lambda, r0));
  if (mismatch > std::max(1e-10 * force_scale(stack), resolution))
    throw PreconditionError("(r0, Lambda) does not satisfy the circular-orbit condition");

  const double omega = Lambda / (r0 * r0);
  const double h = std::min(1e-4 * r0, 0.25 * edge_clearance(stack, r0));
  // The stack is axisymmetric: the Hessian at angle theta is R H0 R^T.
  const auto H0 = hessian(stack, {r0, 0.0, 0.0}, h);

  constexpr std::size_t N = 36;
  using Y = std::array<double, N>;
  auto rhs = [&](double t, const Y& P, Y& F) {
    const double c = std::cos(omega * t);
    const double s = std::sin(omega * t);
    const double Rm[3][3] = {{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}};
    double H[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) acc += Rm[i][k] * H0[k][l] * Rm[j][l];
        H[i][j] = acc;
      }
    // Phi' = [[0, I], [-H, 0]] Phi, row-major.
    for (int col = 0; col < 6; ++col) {
      for (int i = 0; i < 3; ++i) F[i * 6 + col] = P[(i + 3) * 6 + col];
      for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) acc += H[i][k] * P[k * 6 + col];
        F[(i + 3) * 6 + col] = -acc;
      }
    }
  };

  Y identity{};
  for (int i = 0; i < 6; ++i) identity[i * 6 + i] = 1.0;
  auto to_matrix = [](const Y& y) {
    Mat6 M;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) M(i, j) = y[i * 6 + j];
    return M;
  };

  MonodromyResult res;
  res.period = 2.0 * std::numbers::pi * r0 * r0 / Lambda;
  ode::Options opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-12;

  constexpr std::size_t step_budget = 1'000'000;
  std::size_t steps = 0;
  std::vector<Mat6> segs;
  double t = 0.0;
  while (t < res.period) {
    ode::Dop853<N> stepper(rhs, t, identity, opt);
    while (stepper.step(res.period)) {
      if (++steps > step_budget)
        throw IntegrationFailure("monodromy growth exceeds the step budget", stepper.t(),
                                 std::vector<double>(stepper.y().begin(), stepper.y().end()));
      const auto& y = stepper.y();
      const double big = std::abs(*std::max_element(
          y.begin(), y.end(), [](double l, double r) { return std::abs(l) < std::abs(r); }));
      if (big > 1e4) break;
    }
    segs.push_back(to_matrix(stepper.y()));
    t = stepper.t();
  }
  res.segments = segs.size();

  Mat6 M = Mat6::Identity();
  for (const auto& S : segs) M = S * M;
  if (M.allFinite() && M.cwiseAbs().maxCoeff() < 1e300) {
    std::array<std::array<double, 6>, 6> m{};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m[i][j] = M(i, j);
    res.matrix = m;
  }
  res.determinant = 1.0;
  for (const auto& S : segs) res.determinant *= S.determinant();

  // Beyond this growth the small eigenvalues drown in the rounding of the
  // large entries, so only moduli are reported.
  if (res.matrix && M.cwiseAbs().maxCoeff() <= 1e8) {
    res.eigenvalues = sorted_eigenvalues(M);
    for (const auto& ev : res.eigenvalues) res.log_moduli.push_back(std::log(std::abs(ev)));
    std::sort(res.log_moduli.rbegin(), res.log_moduli.rend());
    const auto rest = drop_trivial_pair(res.eigenvalues,
                                        [](const std::complex<double>& z) { return std::abs(z - 1.0); });
    res.spectrally_stable = std::all_of(rest.begin(), rest.end(), [](const auto& ev) {
      return std::abs(std::abs(ev) - 1.0) <= 1e-6;
    });
  } else {
    res.log_moduli = product_log_moduli(segs);
    const auto rest = drop_trivial_pair(res.log_moduli, [](double l) { return std::abs(l); });
    res.spectrally_stable =
        std::all_of(rest.begin(), rest.end(), [](double l) { return std::abs(l) <= 1e-6; });
  }
  return res;
}

}  // namespace annulus::equilibria
