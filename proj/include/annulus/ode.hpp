#pragma once

// Dormand-Prince 8(5,3) integrator with 7th-order dense output, after
// Hairer, Norsett and Wanner's DOP853.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "annulus/errors.hpp"

namespace annulus::ode {

namespace detail {

using Term = std::pair<int, double>;  // (stage index, coefficient)

inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;
inline constexpr double c14 = 0.1e+00;
inline constexpr double c15 = 0.2e+00;
inline constexpr double c16 = 0.777777777777777777777777777778e+00;

inline constexpr std::array<Term, 1> a2 = {{{1, 5.26001519587677318785587544488e-2}}};
inline constexpr std::array<Term, 2> a3 = {{{1, 1.97250569845378994544595329183e-2},
                                            {2, 5.91751709536136983633785987549e-2}}};
inline constexpr std::array<Term, 2> a4 = {{{1, 2.95875854768068491816892993775e-2},
                                            {3, 8.87627564304205475450678981324e-2}}};
inline constexpr std::array<Term, 3> a5 = {{{1, 2.41365134159266685502369798665e-1},
                                            {3, -8.84549479328286085344864962717e-1},
                                            {4, 9.24834003261792003115737966543e-1}}};
inline constexpr std::array<Term, 3> a6 = {{{1, 3.7037037037037037037037037037e-2},
                                            {4, 1.70828608729473871279604482173e-1},
                                            {5, 1.25467687566822425016691814123e-1}}};
inline constexpr std::array<Term, 4> a7 = {{{1, 3.7109375e-2},
                                            {4, 1.70252211019544039314978060272e-1},
                                            {5, 6.02165389804559606850219397283e-2},
                                            {6, -1.7578125e-2}}};
inline constexpr std::array<Term, 5> a8 = {{{1, 3.70920001185047927108779319836e-2},
                                            {4, 1.70383925712239993810214054705e-1},
                                            {5, 1.07262030446373284651809199168e-1},
                                            {6, -1.53194377486244017527936158236e-2},
                                            {7, 8.27378916381402288758473766002e-3}}};
inline constexpr std::array<Term, 6> a9 = {{{1, 6.24110958716075717114429577812e-1},
                                            {4, -3.36089262944694129406857109825e0},
                                            {5, -8.68219346841726006818189891453e-1},
                                            {6, 2.75920996994467083049415600797e1},
                                            {7, 2.01540675504778934086186788979e1},
                                            {8, -4.34898841810699588477366255144e1}}};
inline constexpr std::array<Term, 7> a10 = {{{1, 4.77662536438264365890433908527e-1},
                                             {4, -2.48811461997166764192642586468e0},
                                             {5, -5.90290826836842996371446475743e-1},
                                             {6, 2.12300514481811942347288949897e1},
                                             {7, 1.52792336328824235832596922938e1},
                                             {8, -3.32882109689848629194453265587e1},
                                             {9, -2.03312017085086261358222928593e-2}}};
inline constexpr std::array<Term, 8> a11 = {{{1, -9.3714243008598732571704021658e-1},
                                             {4, 5.18637242884406370830023853209e0},
                                             {5, 1.09143734899672957818500254654e0},
                                             {6, -8.14978701074692612513997267357e0},
                                             {7, -1.85200656599969598641566180701e1},
                                             {8, 2.27394870993505042818970056734e1},
                                             {9, 2.49360555267965238987089396762e0},
                                             {10, -3.0467644718982195003823669022e0}}};
inline constexpr std::array<Term, 9> a12 = {{{1, 2.27331014751653820792359768449e0},
                                             {4, -1.05344954667372501984066689879e1},
                                             {5, -2.00087205822486249909675718444e0},
                                             {6, -1.79589318631187989172765950534e1},
                                             {7, 2.79488845294199600508499808837e1},
                                             {8, -2.85899827713502369474065508674e0},
                                             {9, -8.87285693353062954433549289258e0},
                                             {10, 1.23605671757943030647266201528e1},
                                             {11, 6.43392746015763530355970484046e-1}}};

inline constexpr std::array<Term, 8> b = {{{1, 5.42937341165687622380535766363e-2},
                                           {6, 4.45031289275240888144113950566e0},
                                           {7, 1.89151789931450038304281599044e0},
                                           {8, -5.8012039600105847814672114227e0},
                                           {9, 3.1116436695781989440891606237e-1},
                                           {10, -1.52160949662516078556178806805e-1},
                                           {11, 2.01365400804030348374776537501e-1},
                                           {12, 4.47106157277725905176885569043e-2}}};

// Third-order embedded error: b-sum minus these terms.
inline constexpr std::array<Term, 3> e3 = {{{1, 0.244094488188976377952755905512e+00},
                                            {9, 0.733846688281611857341361741547e+00},
                                            {12, 0.220588235294117647058823529412e-01}}};
inline constexpr std::array<Term, 8> e5 = {{{1, 0.1312004499419488073250102996e-01},
                                            {6, -0.1225156446376204440720569753e+01},
                                            {7, -0.4957589496572501915214079952e+00},
                                            {8, 0.1664377182454986536961530415e+01},
                                            {9, -0.3503288487499736816886487290e+00},
                                            {10, 0.3341791187130174790297318841e+00},
                                            {11, 0.8192320648511571246570742613e-01},
                                            {12, -0.2235530786388629525884427845e-01}}};

// Extra stages for the dense output; stage 13 is f(t + h, y_new).
inline constexpr std::array<Term, 8> a14 = {{{1, 5.61675022830479523392909219681e-2},
                                             {7, 2.53500210216624811088794765333e-1},
                                             {8, -2.46239037470802489917441475441e-1},
                                             {9, -1.24191423263816360469010140626e-1},
                                             {10, 1.5329179827876569731206322685e-1},
                                             {11, 8.20105229563468988491666602057e-3},
                                             {12, 7.56789766054569976138603589584e-3},
                                             {13, -8.298e-3}}};
inline constexpr std::array<Term, 8> a15 = {{{1, 3.18346481635021405060768473261e-2},
                                             {6, 2.83009096723667755288322961402e-2},
                                             {7, 5.35419883074385676223797384372e-2},
                                             {8, -5.49237485713909884646569340306e-2},
                                             {11, -1.08347328697249322858509316994e-4},
                                             {12, 3.82571090835658412954920192323e-4},
                                             {13, -3.40465008687404560802977114492e-4},
                                             {14, 1.41312443674632500278074618366e-1}}};
inline constexpr std::array<Term, 8> a16 = {{{1, -4.28896301583791923408573538692e-1},
                                             {6, -4.69762141536116384314449447206e0},
                                             {7, 7.68342119606259904184240953878e0},
                                             {8, 4.06898981839711007970213554331e0},
                                             {9, 3.56727187455281109270669543021e-1},
                                             {13, -1.39902416515901462129418009734e-3},
                                             {14, 2.9475147891527723389556272149e0},
                                             {15, -9.15095847217987001081870187138e0}}};

// Interpolation coefficients of the four high-order dense terms.
inline constexpr std::array<std::array<Term, 12>, 4> d = {{
    {{{1, -0.84289382761090128651353491142e+01}, {6, 0.56671495351937776962531783590e+00},
      {7, -0.30689499459498916912797304727e+01}, {8, 0.23846676565120698287728149680e+01},
      {9, 0.21170345824450282767155149946e+01}, {10, -0.87139158377797299206789907490e+00},
      {11, 0.22404374302607882758541771650e+01}, {12, 0.63157877876946881815570249290e+00},
      {13, -0.88990336451333310820698117400e-01}, {14, 0.18148505520854727256656404962e+02},
      {15, -0.91946323924783554000451984436e+01}, {16, -0.44360363875948939664310572000e+01}}},
    {{{1, 0.10427508642579134603413151009e+02}, {6, 0.24228349177525818288430175319e+03},
      {7, 0.16520045171727028198505394887e+03}, {8, -0.37454675472269020279518312152e+03},
      {9, -0.22113666853125306036270938578e+02}, {10, 0.77334326684722638389603898808e+01},
      {11, -0.30674084731089398182061213626e+02}, {12, -0.93321305264302278729567221706e+01},
      {13, 0.15697238121770843886131091075e+02}, {14, -0.31139403219565177677282850411e+02},
      {15, -0.93529243588444783865713862664e+01}, {16, 0.35816841486394083752465898540e+02}}},
    {{{1, 0.19985053242002433820987653617e+02}, {6, -0.38703730874935176555105901742e+03},
      {7, -0.18917813819516756882830838328e+03}, {8, 0.52780815920542364900561016686e+03},
      {9, -0.11573902539959630126141871134e+02}, {10, 0.68812326946963000169666922661e+01},
      {11, -0.10006050966910838403183860980e+01}, {12, 0.77771377980534432092869265740e+00},
      {13, -0.27782057523535084065932004339e+01}, {14, -0.60196695231264120758267380846e+02},
      {15, 0.84320405506677161018159903784e+02}, {16, 0.11992291136182789328035130030e+02}}},
    {{{1, -0.25693933462703749003312586129e+02}, {6, -0.15418974869023643374053993627e+03},
      {7, -0.23152937917604549567536039109e+03}, {8, 0.35763911791061412378285349910e+03},
      {9, 0.93405324183624310003907691704e+02}, {10, -0.37458323136451633156875139351e+02},
      {11, 0.10409964950896230045147246184e+03}, {12, 0.29840293426660503123344363579e+02},
      {13, -0.43533456590011143754432175058e+02}, {14, 0.96324553959188282948394950600e+02},
      {15, -0.39177261675615439165231486172e+02}, {16, -0.14972683625798562581422125276e+03}}},
}};

}  // namespace detail

/// Relative tolerances at or below this cannot be met in double precision.
inline constexpr double kMinRelativeTolerance = 10.0 * std::numeric_limits<double>::epsilon();

struct Options {
  double rtol = 1e-12;
  double atol = 1e-12;
  /// First trial step; 0 selects one automatically.
  double h_initial = 0.0;
  /// Largest step magnitude; 0 means unbounded.
  double h_max = 0.0;
  std::size_t max_steps = 10'000'000;
};

/// Interpolant over the last accepted step.
template <std::size_t N>
struct DenseStep {
  double t_old = 0.0;
  double h = 0.0;
  std::array<std::array<double, N>, 8> r{};

  double t_new() const { return t_old + h; }

  std::array<double, N> operator()(double t) const {
    const double s = (t - t_old) / h;
    const double s1 = 1.0 - s;
    std::array<double, N> y;
    for (std::size_t i = 0; i < N; ++i) {
      const double inner = r[4][i] + s * (r[5][i] + s1 * (r[6][i] + s * r[7][i]));
      y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * inner)));
    }
    return y;
  }
};

/// Stepper for y' = f(t, y) with y in R^N. The right-hand side may throw
/// DomainError at trial points; the step is then retried with a smaller h.
template <std::size_t N>
class Dop853 {
 public:
  using State = std::array<double, N>;
  using Rhs = std::function<void(double, const State&, State&)>;

  Dop853(Rhs f, double t0, const State& y0, Options opt = {})
      : f_(std::move(f)), opt_(opt), t_(t0), y_(y0) {
    if (!(opt_.rtol > kMinRelativeTolerance) || !(opt_.atol > 0.0))
      throw PreconditionError("integrator needs rtol > 10 eps and atol > 0");
    if (!try_eval(t_, y_, k_[1]))
      throw IntegrationFailure("right-hand side undefined at the initial state", t_, vec());
  }

  double t() const noexcept { return t_; }
  const State& y() const noexcept { return y_; }
  const DenseStep<N>& dense() const noexcept { return dense_; }
  std::size_t accepted() const noexcept { return accepted_; }
  std::size_t rejected() const noexcept { return rejected_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

  /// Takes one accepted step toward t_stop, never past it. Returns false
  /// when t already equals t_stop.
  bool step(double t_stop) {
    if (t_stop == t_) return false;
    const double dir = t_stop > t_ ? 1.0 : -1.0;
    if (h_ == 0.0) h_ = opt_.h_initial > 0.0 ? opt_.h_initial : initial_step(dir);
    bool last_rejected = false;
    for (;;) {
      if (accepted_ + rejected_ >= opt_.max_steps)
        throw IntegrationFailure("integrator step budget exhausted", t_, vec());
      double habs = h_;
      if (opt_.h_max > 0.0) habs = std::min(habs, opt_.h_max);
      const double remaining = std::abs(t_stop - t_);
      const bool clipped = habs >= remaining;
      if (clipped) habs = remaining;
      if (0.1 * habs <= std::abs(t_) * std::numeric_limits<double>::epsilon() || habs == 0.0)
        throw IntegrationFailure("step size underflow", t_, vec());
      const double h = dir * habs;

      State y_new;
      double err = 0.0;
      if (!attempt(h, y_new, err)) {
        h_ = 0.25 * habs;
        ++rejected_;
        last_rejected = true;
        continue;
      }
      const double fac11 = std::pow(err, 0.125);
      if (err <= 1.0) {
        if (!finish(h, y_new)) {
          h_ = 0.25 * habs;
          ++rejected_;
          last_rejected = true;
          continue;
        }
        double fac = fac11 / std::pow(err_old_, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        double h_next = habs / fac;
        if (last_rejected) h_next = std::min(h_next, habs);
        err_old_ = std::max(err, 1e-4);
        t_ = clipped ? t_stop : t_ + h;
        y_ = y_new;
        k_[1] = k_[13];
        // A step clipped to t_stop says little about the natural step size.
        if (!clipped || h_next > h_) h_ = h_next;
        ++accepted_;
        return true;
      }
      h_ = habs / std::min(1.0 / kFacMin, fac11 / kSafe);
      ++rejected_;
      last_rejected = true;
    }
  }

  /// Integrates to t_stop and returns the final state.
  const State& advance_to(double t_stop) {
    while (step(t_stop)) {
    }
    return y_;
  }

 private:
  static constexpr double kSafe = 0.9;
  static constexpr double kBeta = 0.0;
  static constexpr double kFacMin = 0.333;
  static constexpr double kFacMax = 6.0;

  std::vector<double> vec() const { return {y_.begin(), y_.end()}; }

  bool try_eval(double t, const State& y, State& out) {
    ++evaluations_;
    try {
      f_(t, y, out);
    } catch (const DomainError&) {
      return false;
    }
    for (double v : out)
      if (!std::isfinite(v)) return false;
    return true;
  }

  template <std::size_t M>
  void combine(State& out, double h, const std::array<detail::Term, M>& terms) const {
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (const auto& [k, c] : terms) acc += c * k_[k][i];
      out[i] = y_[i] + h * acc;
    }
  }

  double scale(std::size_t i, const State& y_new) const {
    return opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
  }

  bool attempt(double h, State& y_new, double& err) {
    using namespace detail;
    State w;
    combine(w, h, a2);
    if (!try_eval(t_ + c2 * h, w, k_[2])) return false;
    combine(w, h, a3);
    if (!try_eval(t_ + c3 * h, w, k_[3])) return false;
    combine(w, h, a4);
    if (!try_eval(t_ + c4 * h, w, k_[4])) return false;
    combine(w, h, a5);
    if (!try_eval(t_ + c5 * h, w, k_[5])) return false;
    combine(w, h, a6);
    if (!try_eval(t_ + c6 * h, w, k_[6])) return false;
    combine(w, h, a7);
    if (!try_eval(t_ + c7 * h, w, k_[7])) return false;
    combine(w, h, a8);
    if (!try_eval(t_ + c8 * h, w, k_[8])) return false;
    combine(w, h, a9);
    if (!try_eval(t_ + c9 * h, w, k_[9])) return false;
    combine(w, h, a10);
    if (!try_eval(t_ + c10 * h, w, k_[10])) return false;
    combine(w, h, a11);
    if (!try_eval(t_ + c11 * h, w, k_[11])) return false;
    combine(w, h, a12);
    if (!try_eval(t_ + h, w, k_[12])) return false;
    combine(y_new, h, b);

    double err3 = 0.0;
    double err5 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double bsum = 0.0;
      for (const auto& [k, c] : b) bsum += c * k_[k][i];
      double e3i = bsum;
      for (const auto& [k, c] : e3) e3i -= c * k_[k][i];
      double e5i = 0.0;
      for (const auto& [k, c] : e5) e5i += c * k_[k][i];
      const double sk = scale(i, y_new);
      err3 += (e3i / sk) * (e3i / sk);
      err5 += (e5i / sk) * (e5i / sk);
    }
    double deno = err5 + 0.01 * err3;
    if (deno <= 0.0) deno = 1.0;
    err = std::abs(h) * err5 * std::sqrt(1.0 / (static_cast<double>(N) * deno));
    return std::isfinite(err);
  }

  // Evaluates the FSAL stage and builds the dense output.
  bool finish(double h, const State& y_new) {
    using namespace detail;
    if (!try_eval(t_ + h, y_new, k_[13])) return false;
    State w;
    combine(w, h, a14);
    if (!try_eval(t_ + c14 * h, w, k_[14])) return false;
    combine(w, h, a15);
    if (!try_eval(t_ + c15 * h, w, k_[15])) return false;
    combine(w, h, a16);
    if (!try_eval(t_ + c16 * h, w, k_[16])) return false;

    dense_.t_old = t_;
    dense_.h = h;
    auto& r = dense_.r;
    for (std::size_t i = 0; i < N; ++i) {
      r[0][i] = y_[i];
      r[1][i] = y_new[i] - y_[i];
      r[2][i] = h * k_[1][i] - r[1][i];
      r[3][i] = r[1][i] - h * k_[13][i] - r[2][i];
      for (std::size_t j = 0; j < 4; ++j) {
        double acc = 0.0;
        for (const auto& [k, c] : d[j]) acc += c * k_[k][i];
        r[4 + j][i] = h * acc;
      }
    }
    return true;
  }

  double initial_step(double dir) {
    double dnf = 0.0;
    double dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt_.atol + opt_.rtol * std::abs(y_[i]);
      dnf += (k_[1][i] / sk) * (k_[1][i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    if (opt_.h_max > 0.0) h = std::min(h, opt_.h_max);
    State y1;
    State f1;
    for (;;) {
      for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + dir * h * k_[1][i];
      if (try_eval(t_ + dir * h, y1, f1)) break;
      h *= 0.1;
      if (h < 1e-300) throw IntegrationFailure("no admissible initial step", t_, vec());
    }
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt_.atol + opt_.rtol * std::abs(y_[i]);
      const double di = (f1[i] - k_[1][i]) / sk;
      der2 += di * di;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.125);
    h = std::min(100.0 * h, h1);
    if (opt_.h_max > 0.0) h = std::min(h, opt_.h_max);
    return h;
  }

  Rhs f_;
  Options opt_;
  double t_;
  State y_;
  double h_ = 0.0;
  double err_old_ = 1e-4;
  std::array<State, 17> k_{};
  DenseStep<N> dense_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  std::size_t evaluations_ = 0;
};

/// Locates a sign change of g(t) in [lo, hi] by bisection, returning the
/// first time at which g has the sign of g(hi).
template <class G>
double bisect_time(G&& g, double lo, double hi, double tol) {
  double glo = g(lo);
  for (int it = 0; it < 200 && std::abs(hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if ((gm > 0.0) == (glo > 0.0) && gm != 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace annulus::ode
