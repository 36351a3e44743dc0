#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "annulus/errors.hpp"
#include "annulus/ode.hpp"
#include "annulus/quadrature.hpp"
#include "oracles.hpp"

using namespace annulus;

TEST_SUITE("quadrature") {

TEST_CASE("smooth integrands") {
  const auto r = quadrature::integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto s = quadrature::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("breakpoints isolate kinks and endpoint singularities") {
  const std::array<double, 3> pts{-1.0, 0.3, 2.0};
  const auto r = quadrature::integrate([](double x) { return std::abs(x - 0.3); }, std::span<const double>(pts));
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.5 * 1.3 * 1.3 + 0.5 * 1.7 * 1.7).epsilon(1e-14));
  const auto log_sing = quadrature::integrate([](double x) { return std::log(x); }, 0.0, 1.0);
  CHECK(log_sing.value == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("an exhausted budget is reported") {
  quadrature::Options opt;
  opt.max_intervals = 3;
  const auto r = quadrature::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt);
  CHECK_FALSE(r.converged);
}

TEST_CASE("test oracle agrees with closed forms") {
  CHECK(oracles::tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(oracles::tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(oracles::K(0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
}

}  // TEST_SUITE

TEST_SUITE("ode") {

using Osc = ode::Dop853<2>;

Osc::Rhs oscillator() {
  return [](double, const Osc::State& y, Osc::State& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
}

TEST_CASE("harmonic oscillator over many periods") {
  Osc s(oscillator(), 0.0, {1.0, 0.0});
  const double T = 20 * std::numbers::pi;
  const auto& y = s.advance_to(T);
  CHECK(s.t() == T);
  CHECK(std::abs(y[0] - 1.0) < 1e-10);
  CHECK(std::abs(y[1]) < 1e-10);
  CHECK(s.accepted() > 0);
}

TEST_CASE("backward integration") {
  Osc s(oscillator(), 0.0, {1.0, 0.0});
  const auto& y = s.advance_to(-1.0);
  CHECK(std::abs(y[0] - std::cos(1.0)) < 1e-12);
  CHECK(std::abs(y[1] - std::sin(1.0)) < 1e-12);
}

TEST_CASE("dense output stays accurate inside a step") {
  Osc s(oscillator(), 0.0, {1.0, 0.0});
  double worst = 0.0;
  while (s.step(10.0)) {
    const auto& d = s.dense();
    for (int k = 1; k < 8; ++k) {
      const double t = d.t_old + d.h * k / 8.0;
      worst = std::max(worst, std::abs(d(t)[0] - std::cos(t)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("steps retreat from points where the right-hand side is undefined") {
  // y' = 1 but only for y < 1 + t: every trial beyond the barrier throws,
  // so the stepper must shrink h instead of failing.
  using One = ode::Dop853<1>;
  One s([](double t, const One::State& y, One::State& dy) {
         if (y[0] > 2.0 + t) throw DomainError("outside");
         dy[0] = 1.0;
       },
       0.0, {0.0});
  CHECK(s.advance_to(5.0)[0] == doctest::Approx(5.0));
  CHECK_THROWS_AS(One([](double, const One::State&, One::State&) { throw DomainError("never"); }, 0.0, {0.0}),
                  IntegrationFailure);
}

TEST_CASE("failures carry the last good time") {
  ode::Options opt;
  opt.max_steps = 5;
  Osc s(oscillator(), 0.0, {1.0, 0.0}, opt);
  try {
    s.advance_to(1000.0);
    FAIL("expected IntegrationFailure");
  } catch (const IntegrationFailure& e) {
    CHECK(e.last_time() > 0.0);
    CHECK(e.last_state().size() == 2);
  }
  opt = {};
  opt.rtol = 0.0;
  CHECK_THROWS_AS(Osc(oscillator(), 0.0, {1.0, 0.0}, opt), PreconditionError);
  opt.rtol = ode::kMinRelativeTolerance;
  CHECK_THROWS_AS(Osc(oscillator(), 0.0, {1.0, 0.0}, opt), PreconditionError);
  // Blow-up in finite time: y' = y^2 from y = 1 reaches infinity at t = 1.
  using One = ode::Dop853<1>;
  One blow([](double, const One::State& y, One::State& dy) { dy[0] = y[0] * y[0]; }, 0.0, {1.0});
  CHECK_THROWS_AS(blow.advance_to(2.0), IntegrationFailure);
}

TEST_CASE("event bisection") {
  const double t = ode::bisect_time([](double x) { return std::cos(x); }, 0.0, 3.0, 1e-14);
  CHECK(t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-13));
}

}  // TEST_SUITE
