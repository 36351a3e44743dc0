// Acceptance gate: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Optional arguments select criteria by
// number. Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "annulus/bodies.hpp"
#include "annulus/dynamics.hpp"
#include "annulus/elliptic.hpp"
#include "annulus/equilibria.hpp"
#include "annulus/errors.hpp"
#include "annulus/oracle.hpp"
#include "annulus/potential.hpp"
#include "oracles.hpp"

#ifndef ANNULUS_DYN_EXE
#error "ANNULUS_DYN_EXE must name the annulus-dyn executable"
#endif

using namespace annulus;
namespace pot = annulus::potential;
namespace dyn = annulus::dynamics;
namespace eq = annulus::equilibria;
namespace ell = annulus::elliptic;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const AnnulusBody kAnnulus(1.0, 0.75, 1.0);
const BodyStack kStack(kAnnulus);

// Annulus potential assembled from the naive disk formula (fails at r = a
// and r = b off the plane).
double naive_annulus(const AnnulusBody& an, const FieldPoint& p) {
  const double gs = an.surface_density();
  const double pi = std::numbers::pi;
  return pot::disk_potential_naive(DiskBody(an.a(), gs * pi * an.a() * an.a()), p) -
         pot::disk_potential_naive(DiskBody(an.b(), gs * pi * an.b() * an.b()), p);
}

std::vector<std::array<double, 2>> rz_grid() {
  const std::vector<double> r = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,  0.6, 0.7, 0.8, 0.9,
                                 0.95, 1.0, 1.05, 1.1, 1.2, 1.4, 1.6, 1.8, 2.0, 2.5};
  const std::vector<double> zmag = {0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5};
  std::vector<std::array<double, 2>> out;
  for (double ri : r)
    for (double z : zmag) {
      out.push_back({ri, z});
      out.push_back({ri, -z});
    }
  return out;
}

// Time at which the cubic Hermite interpolant of (q, qdot) between two
// samples crosses zero.
double hermite_crossing(double t0, double q0, double v0, double t1, double q1, double v1) {
  const double h = t1 - t0;
  auto q = [&](double s) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * q0 + (s3 - 2 * s2 + s) * h * v0 + (-2 * s3 + 3 * s2) * q1 +
           (s3 - s2) * h * v1;
  };
  double lo = 0.0, hi = 1.0;
  const bool rising = q0 < 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((q(mid) < 0.0) == rising)
      lo = mid;
    else
      hi = mid;
  }
  return t0 + 0.5 * (lo + hi) * h;
}

// ------------------------------------------------------------------ 1

Outcome c1() {
  const double u = pot::annulus_potential(kAnnulus, {0.0, 0.0, 0.0});
  const double err = std::abs(u - (-8.0 / 7.0));
  return {err <= 1e-12, "U(origin) = " + fmt("%.17g", u) + ", error " + fmt("%.2e", err)};
}

// ------------------------------------------------------------------ 2

Outcome c2() {
  double worst = 0.0;
  int naive_raised = 0, on_line = 0;
  for (const auto& [r, z] : rz_grid()) {
    const FieldPoint p{r, 0.0, z};
    const double closed = pot::annulus_potential(kAnnulus, p);
    const double ref = pot::oracle_potential(kAnnulus, p);
    worst = std::max(worst, std::abs(closed - ref));
    if (r == kAnnulus.a()) {
      ++on_line;
      try {
        (void)naive_annulus(kAnnulus, p);
      } catch (const DomainError&) {
        ++naive_raised;
      }
    }
  }
  const bool pass = worst <= 1e-8 && on_line > 0 && naive_raised == on_line;
  return {pass, "400 points, max |closed - oracle| = " + fmt("%.2e", worst) + ", naive form raised at " +
                    std::to_string(naive_raised) + "/" + std::to_string(on_line) + " points on r = a"};
}

// ------------------------------------------------------------------ 3

Outcome c3() {
  double worst = 0.0;
  int n = 0;
  for (const auto& [r, z] : rz_grid()) {
    if (r == kAnnulus.a()) continue;
    const FieldPoint p{r, 0.0, z};
    worst = std::max(worst, std::abs(naive_annulus(kAnnulus, p) - pot::annulus_potential(kAnnulus, p)));
    ++n;
  }
  return {worst <= 1e-10, std::to_string(n) + " points, max difference " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------------ 4

Outcome c4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> xy(-2.0, 2.0), zz(0.05, 1.0), sign(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const FieldPoint p{xy(rng), xy(rng), (sign(rng) < 0 ? -1.0 : 1.0) * zz(rng)};
    const Vec3 g = pot::annulus_gradient(kAnnulus, p);
    double diff2 = 0.0, norm2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      auto U = [&](double step) {
        FieldPoint q = p;
        (i == 0 ? q.x : i == 1 ? q.y : q.z) += step;
        return pot::annulus_potential(kAnnulus, q);
      };
      const double h = 1e-3;
      const double d1 = (U(h) - U(-h)) / (2 * h);
      const double d2 = (U(h / 2) - U(-h / 2)) / h;
      const double fd = (4 * d2 - d1) / 3;
      diff2 += (fd - g[i]) * (fd - g[i]);
      norm2 += g[i] * g[i];
    }
    worst = std::max(worst, std::sqrt(diff2 / norm2));
  }
  return {worst <= 1e-6, "100 points, max relative difference " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------------ 5

double plate_clearance(const AnnulusBody& an, double r, double z) {
  const double dr = r < an.b() ? an.b() - r : r > an.a() ? r - an.a() : 0.0;
  return std::hypot(dr, z);
}

Outcome c5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(-3.0, 3.0), zz(-2.0, 2.0);
  double worst = 0.0;
  int n = 0;
  while (n < 100) {
    const FieldPoint p{xy(rng), xy(rng), zz(rng)};
    if (plate_clearance(kAnnulus, p.r(), p.z) < 0.1) continue;
    const double h = 2e-4;
    const double u0 = pot::annulus_potential(kAnnulus, p);
    double lap = 0.0;
    for (int i = 0; i < 3; ++i) {
      FieldPoint a = p, b = p;
      (i == 0 ? a.x : i == 1 ? a.y : a.z) += h;
      (i == 0 ? b.x : i == 1 ? b.y : b.z) -= h;
      lap += (pot::annulus_potential(kAnnulus, a) - 2 * u0 + pot::annulus_potential(kAnnulus, b)) / (h * h);
    }
    worst = std::max(worst, std::abs(lap));
    ++n;
  }
  return {worst <= 1e-4, "100 points, max |discrete Laplacian| = " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------------ 6

Outcome c6() {
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const double r_in = 0.01 + (0.74 - 0.01) * i / 49.0;
    const double r_out = 1.01 + (20.0 - 1.01) * i / 49.0;
    if (!(pot::planar_radial_derivative(kAnnulus, r_in) < 0.0)) ++bad;
    if (!(pot::planar_radial_derivative(kAnnulus, r_out) > 0.0)) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " sign violations over 100 points"};
}

// ------------------------------------------------------------------ 7

Outcome c7() {
  std::ostringstream d;
  bool pass = true;
  auto census = [&](double L) { return eq::find_planar_critical_points(kStack, L, 200.0); };
  auto certified = [&](const std::vector<eq::EquilibriumReport>& reps) {
    for (const auto& r : reps) {
      if (!(r.residual <= 1e-10) || !r.bracket) return false;
      const double wl = dyn::W_prime(kStack, r.Lambda, r.bracket->first);
      const double wh = dyn::W_prime(kStack, r.Lambda, r.bracket->second);
      const bool exact = r.bracket->first == r.bracket->second && wl == 0.0;
      if (!exact && !(wl * wh <= 0.0)) return false;
    }
    return true;
  };
  auto count = [](const std::vector<eq::EquilibriumReport>& reps, eq::Region region) {
    return std::count_if(reps.begin(), reps.end(), [&](const auto& r) { return r.region == region; });
  };

  const auto r0 = census(0.0);
  const bool origin = std::any_of(r0.begin(), r0.end(), [](const auto& r) { return r.r0 == 0.0; });
  const auto plate0 = count(r0, eq::Region::PlateInterior);
  pass &= origin && plate0 == 1 && certified(r0);
  d << "L=0: origin " << (origin ? "yes" : "no") << ", in-plate " << plate0 << "; ";

  const auto r1 = census(1.0);
  const auto ext1 = count(r1, eq::Region::Exterior);
  pass &= ext1 == 0 && certified(r1);
  d << "L=1: exterior " << ext1 << "; ";

  const auto r25 = census(2.5);
  std::vector<double> curv;
  for (const auto& r : r25)
    if (r.region == eq::Region::Exterior) curv.push_back(r.curvature);
  const bool opposite = curv.size() == 2 && curv[0] * curv[1] < 0.0;
  pass &= opposite && certified(r25);
  d << "L=2.5: exterior " << curv.size() << (opposite ? " with opposite W'' signs" : "");
  double worst = 0.0;
  for (const auto* set : {&r0, &r1, &r25})
    for (const auto& r : *set) worst = std::max(worst, r.residual);
  d << "; max residual " << fmt("%.2e", worst);
  return {pass, d.str()};
}

// ------------------------------------------------------------------ 8

Outcome c8() {
  const auto res = eq::bifurcation_lambda(kStack, 0.1, 2.5, 1e-8);
  const double bound = eq::sufficient_lambda(kAnnulus);
  const double width = res.bracket.second - res.bracket.first;
  const bool pass = res.lambda_star <= bound && width <= 1e-6;
  return {pass, "lambda* = " + fmt("%.12f", res.lambda_star) + ", bound " + fmt("%.6f", bound) +
                    ", bracket width " + fmt("%.2e", width)};
}

// ------------------------------------------------------------------ 9

Outcome c9() {
  const auto s = eq::origin_spectrum(kStack);
  const double trace = s.hessian[0][0] + s.hessian[1][1] + s.hessian[2][2];
  double in_plane = 0.0, axial = 0.0;
  for (const auto& ev : s.eigenvalues) {
    if (std::abs(ev.imag()) < 1e-12 * std::abs(ev))
      in_plane = std::max(in_plane, std::abs(ev));
    else
      axial = std::max(axial, std::abs(ev));
  }
  const double a = kAnnulus.a(), b = kAnnulus.b(), mu = kAnnulus.mu();
  const double expected = std::sqrt(mu / (a * b * (a + b)));
  const double ratio = axial / in_plane;
  const bool pass = std::abs(trace) <= 1e-6 && std::abs(ratio - std::sqrt(2.0)) <= 1e-6 &&
                    std::abs(in_plane - expected) <= 1e-6 && !s.spectrally_stable;
  return {pass, "trace " + fmt("%.2e", trace) + ", in-plane " + fmt("%.12f", in_plane) + " (expected " +
                    fmt("%.12f", expected) + "), ratio " + fmt("%.12f", ratio) + ", verdict " +
                    (s.spectrally_stable ? "stable" : "spectrally unstable")};
}

// ------------------------------------------------------------------ 10

Outcome c10() {
  const double r0 = 2.0;
  const double L = eq::circular_lambda(kStack, r0);
  const double T = 2 * std::numbers::pi * r0 * r0 / L;
  dyn::IntegrationOptions opt;
  opt.sample_dt = T / 1000.0;
  const auto traj = dyn::integrate(kStack, {r0, 0, 0, 0, L / r0, 0}, 10.0 * T + 0.5 * opt.sample_dt, opt);
  double dev = 0.0;
  std::vector<double> crossings;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i].state;
    dev = std::max(dev, std::abs(std::hypot(s.x, s.y) - r0));
    if (i == 0) continue;
    const auto& p = traj.samples[i - 1].state;
    if (p.y < 0.0 && s.y >= 0.0 && s.x > 0.0)
      crossings.push_back(hermite_crossing(traj.samples[i - 1].t, p.y, p.vy, traj.samples[i].t, s.y, s.vy));
  }
  const bool ran = traj.termination == dyn::Termination::TimeLimit && crossings.size() == 10;
  const double measured = ran ? crossings.back() / 10.0 : 0.0;
  const double perr = std::abs(measured - T);
  return {ran && dev <= 1e-8 && perr <= 1e-6,
          "max |r - r0| = " + fmt("%.2e", dev) + " over 10 periods, period " + fmt("%.12f", measured) +
              " vs " + fmt("%.12f", T) + " (error " + fmt("%.2e", perr) + ")"};
}

// ------------------------------------------------------------------ 11

Outcome c11() {
  const double L = eq::circular_lambda(kStack, 2.0);
  struct Ref {
    const char* name;
    dyn::CartesianState s0;
  };
  const Ref refs[] = {{"axial libration", {0, 0, 0.5, 0, 0, 0}},
                      {"exterior circular", {2, 0, 0, 0, L / 2.0, 0}},
                      {"exterior eccentric", {2, 0, 0, 0, 0.9, 0}}};
  bool pass = true;
  std::ostringstream d;
  for (const auto& ref : refs) {
    dyn::IntegrationOptions opt;
    opt.sample_dt = 0.5;
    const auto traj = dyn::integrate(kStack, ref.s0, 100.0, opt);
    const double e0 = dyn::energy(kStack, ref.s0);
    const double l0 = ref.s0.angular_momentum();
    double de = 0.0, dl = 0.0;
    for (const auto& smp : traj.samples) {
      de = std::max(de, std::abs(dyn::energy(kStack, smp.state) - e0) / std::abs(e0));
      const double l = smp.state.angular_momentum();
      dl = std::max(dl, l0 != 0.0 ? std::abs(l - l0) / std::abs(l0) : std::abs(l));
    }
    const bool ok = traj.termination == dyn::Termination::TimeLimit && de <= 1e-9 && dl <= 1e-9;
    pass &= ok;
    d << ref.name << ": dE " << fmt("%.1e", de) << ", dL " << fmt("%.1e", dl) << "; ";
  }
  return {pass, d.str()};
}

// ------------------------------------------------------------------ 12

Outcome c12() {
  const double Estar = dyn::centre_energy(kAnnulus);
  bool pass = true;
  double worst = 0.0;
  for (double f : {0.95, 0.8, 0.6, 0.4, 0.2}) {
    const double E = f * Estar;
    const double zt = dyn::axial_turning_point(kAnnulus, E);
    const double Tq = dyn::axial_period(kAnnulus, E);
    dyn::IntegrationOptions opt;
    opt.sample_dt = Tq / 2000.0;
    const auto traj = dyn::integrate(kStack, {0, 0, zt, 0, 0, 0}, 1.2 * Tq, opt);
    std::vector<double> cross;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      const auto& p = traj.samples[i - 1].state;
      const auto& s = traj.samples[i].state;
      if ((p.z > 0.0) != (s.z > 0.0))
        cross.push_back(hermite_crossing(traj.samples[i - 1].t, p.z, p.vz, traj.samples[i].t, s.z, s.vz));
    }
    if (cross.size() < 2) return {false, "axial orbit did not cross the plane twice at E = " + fmt("%g", E)};
    const double Tode = 2.0 * (cross[1] - cross[0]);
    const double rel = std::abs(Tode - Tq) / Tq;
    worst = std::max(worst, rel);
    pass &= rel <= 1e-6;
  }
  const double harmonic = 2 * std::numbers::pi / std::sqrt(32.0 / 21.0);
  const double Th = dyn::axial_period(kAnnulus, Estar + 1e-6);
  pass &= std::abs(Th - harmonic) <= 1e-3;
  return {pass, "max relative period difference " + fmt("%.2e", worst) + " over 5 energies; T(E*+1e-6) = " +
                    fmt("%.9f", Th) + " vs " + fmt("%.9f", harmonic)};
}

// ------------------------------------------------------------------ 13

Outcome c13() {
  const BodyStack two({AnnulusBody(0.5, 0.3, 0.5), AnnulusBody(1.0, 0.75, 0.5)});
  bool pass = true;
  std::ostringstream d;
  for (double L : {2.0, 4.0}) {
    d << "L=" << L << ": ";
    try {
      const auto gap = eq::gap_equilibria(two, L);
      d << gap.size() << " gap point(s)";
      if (gap.size() != 1) {
        pass = false;
      } else {
        d << " at r0 = 0.5 + " << fmt("%.3e", gap[0].r0 - 0.5);
        const auto m = eq::circular_orbit_monodromy(two, gap[0].r0, L);
        d << ", monodromy " << (m.spectrally_stable ? "stable" : "unstable") << " (max log|lambda| "
          << fmt("%.4g", m.log_moduli.front()) << ")";
        pass &= !m.spectrally_stable;
      }
    } catch (const Error& e) {
      d << "error: " << e.what();
      pass = false;
    }
    d << "; ";
  }
  return {pass, d.str()};
}

// ------------------------------------------------------------------ 14

Outcome c14() {
  double legendre = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double m = (i + 0.5) / 1000.0;
    const auto p = ell::EllipticParameter(m);
    const auto q = ell::EllipticParameter::from_complement(m);
    const double lhs = ell::complete_E(p) * ell::complete_K(q) + ell::complete_E(q) * ell::complete_K(p) -
                       ell::complete_K(p) * ell::complete_K(q);
    legendre = std::max(legendre, std::abs(lhs / (std::numbers::pi / 2) - 1.0));
  }

  // 200-point parameter grid: 20 values of m by 10 values of the second
  // argument (phi or n2).
  std::array<double, 6> worst{};
  const double half_pi = std::numbers::pi / 2;
  for (int i = 0; i < 20; ++i) {
    const double m = 0.01 + 0.98 * i / 19.0;
    for (int j = 0; j < 10; ++j) {
      const double phi = half_pi * (j + 1) / 10.0;
      const double n2 = 0.9 * j / 9.0;
      auto rel = [](double v, double ref) { return std::abs(v - ref) / std::max(1.0, std::abs(ref)); };
      worst[0] = std::max(worst[0], rel(ell::complete_K(m), oracles::K(m)));
      worst[1] = std::max(worst[1], rel(ell::complete_E(m), oracles::E(m)));
      worst[2] = std::max(worst[2], rel(ell::complete_Pi(n2, m), oracles::Pi(n2, m)));
      worst[3] = std::max(worst[3], rel(ell::incomplete_F(phi, m), oracles::F(phi, m)));
      worst[4] = std::max(worst[4], rel(ell::incomplete_E(phi, m), oracles::Einc(phi, m)));
      worst[5] = std::max(worst[5], rel(ell::heuman_lambda(phi, m), oracles::heuman(phi, m)));
    }
  }
  const double w = *std::max_element(worst.begin(), worst.end());
  std::ostringstream d;
  d << "Legendre " << fmt("%.2e", legendre) << "; K " << fmt("%.1e", worst[0]) << ", E "
    << fmt("%.1e", worst[1]) << ", Pi " << fmt("%.1e", worst[2]) << ", F " << fmt("%.1e", worst[3])
    << ", E(phi) " << fmt("%.1e", worst[4]) << ", Lambda0 " << fmt("%.1e", worst[5]);
  return {legendre <= 1e-13 && w <= 1e-12, d.str()};
}

// ------------------------------------------------------------------ 15

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome c15() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("annulus_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> runs = {
      "eval --grid x=-2:2:41 y=-2:2:41 z=0",
      "eval --grid x=-1.5:1.5:21 y=0 z=-1:1:21",
      "equilibria --lambda 0,1,2.5",
      "equilibria --annulus 0.5,0.3,0.5 --annulus 1,0.75,0.5 --lambda 2 --monodromy",
      "portrait --mode planar --lambda 1,2.25 --emit-wprime",
      "portrait --mode axial --level-count 5",
      "bifurcation --bracket 0.1 2.5",
      "orbit --state 2,0,0,0,1.25,0 --tmax 100"};
  std::size_t compared = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (int threads : {1, 8}) {
      const fs::path dir = root / ("t" + std::to_string(threads));
      fs::create_directories(dir);
      const std::string cmd = std::string("\"") + ANNULUS_DYN_EXE + "\" " + runs[k] + " --threads " +
                              std::to_string(threads) + " --out \"" + (dir / ("run" + std::to_string(k))).string() +
                              "\"";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + runs[k]};
    }
  }
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(root / "t1")) names.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(root / "t8")) names.insert(e.path().filename().string());
  for (const auto& n : names) {
    const fs::path a = root / "t1" / n, b = root / "t8" / n;
    if (!fs::exists(a) || !fs::exists(b)) return {false, "file present for one thread count only: " + n};
    if (slurp(a) != slurp(b)) return {false, "outputs differ: " + n};
    ++compared;
  }
  fs::remove_all(root);
  return {compared > 0, std::to_string(runs.size()) + " commands, " + std::to_string(compared) +
                            " files byte-identical for --threads 1 and 8"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "origin value", c1},
      {2, "oracle equivalence", c2},
      {3, "naive/reformulated agreement", c3},
      {4, "gradient correctness", c4},
      {5, "harmonicity", c5},
      {6, "monotonicity", c6},
      {7, "equilibrium census", c7},
      {8, "bifurcation", c8},
      {9, "origin spectrum", c9},
      {10, "circular orbit", c10},
      {11, "energy and angular momentum drift", c11},
      {12, "axial period", c12},
      {13, "composite annuli", c13},
      {14, "elliptic kernel", c14},
      {15, "determinism", c15},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
