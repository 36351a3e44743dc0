#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <queue>
#include <span>
#include <utility>

namespace annulus::quadrature {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> kKronrodNodes = {
    0.0,
    1.4887433898163121088482600112971998461756485942069e-01,
    2.9439286270146019813112660310386556616268662515696e-01,
    4.3339539412924719079926594316578416220007183765625e-01,
    5.6275713466860468333900009927269414084301388194197e-01,
    6.7940956829902440623432736511487357576929471183481e-01,
    7.8081772658641689706371757834504237716340752029816e-01,
    8.6506336668898451073209668842349304852754301496533e-01,
    9.3015749135570822600120718005950834622516790998194e-01,
    9.7390652851717172007796401208445205342826994669238e-01,
    9.9565716302580808073552728068900284792126058721948e-01};

inline constexpr std::array<double, 11> kKronrodWeights = {
    1.4944555400291690566493646838982120374523631668747e-01,
    1.4773910490133849137484151597206804552373162548521e-01,
    1.4277593857706008079709427313871706088597905653191e-01,
    1.3470921731147332592805400177170683276099191300856e-01,
    1.2349197626206585107795810983107415951230034952865e-01,
    1.0938715880229764189921059032580496027181329983435e-01,
    9.3125454583697605535065465083366344390018828880760e-02,
    7.5039674810919952767043140916190009395219382000910e-02,
    5.4755896574351996031381300244580176373721114058334e-02,
    3.2558162307964727478818972459389760617388939845663e-02,
    1.1694638867371874278064396062192048396217332481932e-02};

// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> kGaussWeights = {
    2.9552422471475287017389299465133832942104671702685e-01,
    2.6926671930999635509122692156946935285975993846088e-01,
    2.1908636251598204399553493422816319245877187052268e-01,
    1.4945134915058059314577633965769733240255663966943e-01,
    6.6671344308688137593568809893331792857864834320158e-02};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod21(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < kKronrodNodes.size(); ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrates f over consecutive intervals delimited by `points` (at least
/// two, ascending). Interior points act as forced breakpoints, so the
/// integrand is never sampled on them.
template <class F>
Result integrate(F&& f, std::span<const double> points, const Options& opt = {}) {
  std::priority_queue<detail::Segment> queue;
  Result out;
  double frozen_value = 0.0;  // segments too narrow to split further
  double frozen_error = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] == points[i]) continue;
    queue.push(detail::kronrod21(f, points[i], points[i + 1]));
    out.evaluations += 21;
  }

  auto totals = [&](double& value, double& error) {
    value = frozen_value;
    error = frozen_error;
    auto copy = queue;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  };

  double value = 0.0, error = 0.0;
  totals(value, error);
  std::size_t intervals = queue.size();
  while (!queue.empty() && error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) &&
         intervals < opt.max_intervals) {
    const detail::Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen_value += worst.value;
      frozen_error += worst.error;
      continue;
    }
    const auto left = detail::kronrod21(f, worst.a, mid);
    const auto right = detail::kronrod21(f, mid, worst.b);
    out.evaluations += 42;
    ++intervals;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  // Re-sum to shed the drift of the running totals.
  totals(value, error);
  out.value = value;
  out.error = error;
  out.converged = error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> pts{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(pts), opt);
}

}  // namespace annulus::quadrature
