#pragma once

// Adaptive Dormand-Prince 8(5,3) integrator with 7th-order dense output.
//
// Coefficients follow E. Hairer, S.P. Norsett, G. Wanner, "Solving Ordinary
// Differential Equations I", 2nd ed., and the reference DOP853.F code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "capchan/error.hpp"

namespace capchan::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::size_t max_steps = 5'000'000;
  double h_max = std::numeric_limits<double>::infinity();
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  /// Largest normalized local error estimate over accepted steps (<= 1).
  double max_error_ratio = 0.0;
};

/// Continuous extension of one accepted step, valid on [s0, s0 + h].
template <std::size_t N>
struct DenseSegment {
  double s0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 8> rc{};

  [[nodiscard]] double s1() const { return s0 + h; }

  [[nodiscard]] double component(double s, std::size_t i) const {
    const double t = (s - s0) / h;
    const double t1 = 1.0 - t;
    return rc[0][i] +
           t * (rc[1][i] + t1 * (rc[2][i] + t * (rc[3][i] + t1 * (rc[4][i] + t * (rc[5][i] + t1 * (rc[6][i] + t * rc[7][i]))))));
  }

  [[nodiscard]] Vec<N> eval(double s) const {
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) y[i] = component(s, i);
    return y;
  }
};

namespace detail {

struct Tableau {
  static constexpr double c2 = 0.526001519587677318785587544488E-01, c3 = 0.789002279381515978178381316732E-01,
                          c4 = 0.118350341907227396726757197510E+00, c5 = 0.281649658092772603273242802490E+00,
                          c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                          c8 = 0.307692307692307692307692307692E+00, c9 = 0.651282051282051282051282051282E+00,
                          c10 = 0.6E+00, c11 = 0.857142857142857142857142857142E+00, c14 = 0.1E+00, c15 = 0.2E+00,
                          c16 = 0.777777777777777777777777777778E+00;

  static constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                          b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                          b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                          b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;

  static constexpr double bhh1 = 0.244094488188976377952755905512E+00, bhh2 = 0.733846688281611857341361741547E+00,
                          bhh3 = 0.220588235294117647058823529412E-01;

  static constexpr double er1 = 0.1312004499419488073250102996E-01, er6 = -0.1225156446376204440720569753E+01,
                          er7 = -0.4957589496572501915214079952E+00, er8 = 0.1664377182454986536961530415E+01,
                          er9 = -0.3503288487499736816886487290E+00, er10 = 0.3341791187130174790297318841E+00,
                          er11 = 0.8192320648511571246570742613E-01, er12 = -0.2235530786388629525884427845E-01;

  static constexpr double a21 = 5.26001519587677318785587544488E-2, a31 = 1.97250569845378994544595329183E-2,
                          a32 = 5.91751709536136983633785987549E-2, a41 = 2.95875854768068491816892993775E-2,
                          a43 = 8.87627564304205475450678981324E-2, a51 = 2.41365134159266685502369798665E-1,
                          a53 = -8.84549479328286085344864962717E-1, a54 = 9.24834003261792003115737966543E-1,
                          a61 = 3.7037037037037037037037037037E-2, a64 = 1.70828608729473871279604482173E-1,
                          a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                          a74 = 1.70252211019544039314978060272E-1, a75 = 6.02165389804559606850219397283E-2,
                          a76 = -1.7578125E-2, a81 = 3.70920001185047927108779319836E-2,
                          a84 = 1.70383925712239993810214054705E-1, a85 = 1.07262030446373284651809199168E-1,
                          a86 = -1.53194377486244017527936158236E-2, a87 = 8.27378916381402288758473766002E-3,
                          a91 = 6.24110958716075717114429577812E-1, a94 = -3.36089262944694129406857109825E0,
                          a95 = -8.68219346841726006818189891453E-1, a96 = 2.75920996994467083049415600797E1,
                          a97 = 2.01540675504778934086186788979E1, a98 = -4.34898841810699588477366255144E1,
                          a101 = 4.77662536438264365890433908527E-1, a104 = -2.48811461997166764192642586468E0,
                          a105 = -5.90290826836842996371446475743E-1, a106 = 2.12300514481811942347288949897E1,
                          a107 = 1.52792336328824235832596922938E1, a108 = -3.32882109689848629194453265587E1,
                          a109 = -2.03312017085086261358222928593E-2, a111 = -9.3714243008598732571704021658E-1,
                          a114 = 5.18637242884406370830023853209E0, a115 = 1.09143734899672957818500254654E0,
                          a116 = -8.14978701074692612513997267357E0, a117 = -1.85200656599969598641566180701E1,
                          a118 = 2.27394870993505042818970056734E1, a119 = 2.49360555267965238987089396762E0,
                          a1110 = -3.0467644718982195003823669022E0, a121 = 2.27331014751653820792359768449E0,
                          a124 = -1.05344954667372501984066689879E1, a125 = -2.00087205822486249909675718444E0,
                          a126 = -1.79589318631187989172765950534E1, a127 = 2.79488845294199600508499808837E1,
                          a128 = -2.85899827713502369474065508674E0, a129 = -8.87285693353062954433549289258E0,
                          a1210 = 1.23605671757943030647266201528E1, a1211 = 6.43392746015763530355970484046E-1;

  static constexpr double a141 = 5.61675022830479523392909219681E-2, a147 = 2.53500210216624811088794765333E-1,
                          a148 = -2.46239037470802489917441475441E-1, a149 = -1.24191423263816360469010140626E-1,
                          a1410 = 1.5329179827876569731206322685E-1, a1411 = 8.20105229563468988491666602057E-3,
                          a1412 = 7.56789766054569976138603589584E-3, a1413 = -8.298E-3,
                          a151 = 3.18346481635021405060768473261E-2, a156 = 2.83009096723667755288322961402E-2,
                          a157 = 5.35419883074385676223797384372E-2, a158 = -5.49237485713909884646569340306E-2,
                          a1511 = -1.08347328697249322858509316994E-4, a1512 = 3.82571090835658412954920192323E-4,
                          a1513 = -3.40465008687404560802977114492E-4, a1514 = 1.41312443674632500278074618366E-1,
                          a161 = -4.28896301583791923408573538692E-1, a166 = -4.69762141536116384314449447206E0,
                          a167 = 7.68342119606259904184240953878E0, a168 = 4.06898981839711007970213554331E0,
                          a169 = 3.56727187455281109270669543021E-1, a1613 = -1.39902416515901462129418009734E-3,
                          a1614 = 2.9475147891527723389556272149E0, a1615 = -9.15095847217987001081870187138E0;

  static constexpr double d41 = -0.84289382761090128651353491142E+01, d46 = 0.56671495351937776962531783590E+00,
                          d47 = -0.30689499459498916912797304727E+01, d48 = 0.23846676565120698287728149680E+01,
                          d49 = 0.21170345824450282767155149946E+01, d410 = -0.87139158377797299206789907490E+00,
                          d411 = 0.22404374302607882758541771650E+01, d412 = 0.63157877876946881815570249290E+00,
                          d413 = -0.88990336451333310820698117400E-01, d414 = 0.18148505520854727256656404962E+02,
                          d415 = -0.91946323924783554000451984436E+01, d416 = -0.44360363875948939664310572000E+01;
  static constexpr double d51 = 0.10427508642579134603413151009E+02, d56 = 0.24228349177525818288430175319E+03,
                          d57 = 0.16520045171727028198505394887E+03, d58 = -0.37454675472269020279518312152E+03,
                          d59 = -0.22113666853125306036270938578E+02, d510 = 0.77334326684722638389603898808E+01,
                          d511 = -0.30674084731089398182061213626E+02, d512 = -0.93321305264302278729567221706E+01,
                          d513 = 0.15697238121770843886131091075E+02, d514 = -0.31139403219565177677282850411E+02,
                          d515 = -0.93529243588444783865713862664E+01, d516 = 0.35816841486394083752465898540E+02;
  static constexpr double d61 = 0.19985053242002433820987653617E+02, d66 = -0.38703730874935176555105901742E+03,
                          d67 = -0.18917813819516756882830838328E+03, d68 = 0.52780815920542364900561016686E+03,
                          d69 = -0.11573902539959630126141871134E+02, d610 = 0.68812326946963000169666922661E+01,
                          d611 = -0.10006050966910838403183860980E+01, d612 = 0.77771377980534432092869265740E+00,
                          d613 = -0.27782057523535084065932004339E+01, d614 = -0.60196695231264120758267380846E+02,
                          d615 = 0.84320405506677161018159903784E+02, d616 = 0.11992291136182789328035130030E+02;
  static constexpr double d71 = -0.25693933462703749003312586129E+02, d76 = -0.15418974869023643374053993627E+03,
                          d77 = -0.23152937917604549567536039109E+03, d78 = 0.35763911791061412378285349910E+03,
                          d79 = 0.93405324183624310003907691704E+02, d710 = -0.37458323136451633156875139351E+02,
                          d711 = 0.10409964950896230045147246184E+03, d712 = 0.29840293426660503123344363579E+02,
                          d713 = -0.43533456590011143754432175058E+02, d714 = 0.96324553959188282948394950600E+02,
                          d715 = -0.39177261675615439165231486172E+02, d716 = -0.14972683625798562581422125276E+03;
};

}  // namespace detail

/// One-step-at-a-time DOP853 driver.
///
/// `Rhs` is callable as `rhs(double t, const Vec<N>& y, Vec<N>& dydt)`.
/// `scale_cap` bounds the magnitude used for the relative part of the error
/// weight per component; an unwrapped angle keeps absolute accuracy this way
/// even after many windings.
template <std::size_t N, class Rhs>
class Dop853 {
 public:
  Dop853(Rhs rhs, double t0, const Vec<N>& y0, StepControl control,
         Vec<N> scale_cap = filled(std::numeric_limits<double>::infinity()))
      : rhs_(std::move(rhs)), control_(control), cap_(scale_cap), t_(t0), y_(y0) {
    eval(t_, y_, k1_);
    h_ = initial_step(control_.h_max);
  }

  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] const Vec<N>& y() const { return y_; }
  [[nodiscard]] const StepStats& stats() const { return stats_; }

  /// Advances by one accepted step, never past `t_end`, and returns the
  /// continuous extension over that step.
  DenseSegment<N> step(double t_end) {
    constexpr double safe = 0.9, fac1 = 1.0 / 3.0, fac2 = 6.0, expo = 1.0 / 8.0;
    bool reject = false;
    for (;;) {
      if (stats_.accepted + stats_.rejected >= control_.max_steps)
        fail(ErrorCode::ToleranceNotMet, "step budget exhausted at t=" + std::to_string(t_));
      if (0.1 * std::abs(h_) <= std::abs(t_) * 2.3e-16)
        fail(ErrorCode::ToleranceNotMet, "step size underflow at t=" + std::to_string(t_));
      bool last = false;
      double h = std::min(h_, control_.h_max);
      if (t_ + 1.01 * h >= t_end) {
        h = t_end - t_;
        last = true;
      }
      stage_all(h);
      const double err = error_norm(h);
      const double fac11 = std::pow(err, expo);
      double fac = std::clamp(fac11 / safe, 1.0 / fac2, 1.0 / fac1);
      double h_new = h / fac;
      if (err <= 1.0) {
        ++stats_.accepted;
        stats_.max_error_ratio = std::max(stats_.max_error_ratio, err);
        eval(t_ + h, y_new_, k4_);  // K13 (first-same-as-last)
        DenseSegment<N> seg = dense(h);
        k1_ = k4_;
        y_ = y_new_;
        t_ = last ? t_end : t_ + h;
        if (reject) h_new = std::min(h_new, h);
        h_ = std::min(h_new, control_.h_max);
        return seg;
      }
      ++stats_.rejected;
      reject = true;
      h_ = h / std::min(1.0 / fac1, fac11 / safe);
    }
  }

 private:
  static constexpr Vec<N> filled(double v) {
    Vec<N> a{};
    a.fill(v);
    return a;
  }

  void eval(double t, const Vec<N>& y, Vec<N>& out) {
    rhs_(t, y, out);
    ++stats_.rhs_evals;
  }

  double weight(std::size_t i, double a, double b) const {
    return control_.abs_tol + control_.rel_tol * std::min(cap_[i], std::max(std::abs(a), std::abs(b)));
  }

  double initial_step(double h_max) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = weight(i, y_[i], y_[i]);
      dnf += (k1_[i] / sk) * (k1_[i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, h_max);
    Vec<N> y1, f1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h * k1_[i];
    eval(t_ + h, y1, f1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double q = (f1[i] - k1_[i]) / weight(i, y_[i], y_[i]);
      der2 += q * q;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.125);
    return std::min({100.0 * h, h1, h_max});
  }

  void combo(Vec<N>& out, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) const {
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : terms) acc += c * (*k)[i];
      out[i] = y_[i] + h * acc;
    }
  }

  void stage_all(double h) {
    using T = detail::Tableau;
    Vec<N> w;
    combo(w, h, {{T::a21, &k1_}});
    eval(t_ + T::c2 * h, w, k2_);
    combo(w, h, {{T::a31, &k1_}, {T::a32, &k2_}});
    eval(t_ + T::c3 * h, w, k3_);
    combo(w, h, {{T::a41, &k1_}, {T::a43, &k3_}});
    eval(t_ + T::c4 * h, w, k4_);
    combo(w, h, {{T::a51, &k1_}, {T::a53, &k3_}, {T::a54, &k4_}});
    eval(t_ + T::c5 * h, w, k5_);
    combo(w, h, {{T::a61, &k1_}, {T::a64, &k4_}, {T::a65, &k5_}});
    eval(t_ + T::c6 * h, w, k6_);
    combo(w, h, {{T::a71, &k1_}, {T::a74, &k4_}, {T::a75, &k5_}, {T::a76, &k6_}});
    eval(t_ + T::c7 * h, w, k7_);
    combo(w, h, {{T::a81, &k1_}, {T::a84, &k4_}, {T::a85, &k5_}, {T::a86, &k6_}, {T::a87, &k7_}});
    eval(t_ + T::c8 * h, w, k8_);
    combo(w, h, {{T::a91, &k1_}, {T::a94, &k4_}, {T::a95, &k5_}, {T::a96, &k6_}, {T::a97, &k7_}, {T::a98, &k8_}});
    eval(t_ + T::c9 * h, w, k9_);
    combo(w, h,
          {{T::a101, &k1_}, {T::a104, &k4_}, {T::a105, &k5_}, {T::a106, &k6_}, {T::a107, &k7_}, {T::a108, &k8_},
           {T::a109, &k9_}});
    eval(t_ + T::c10 * h, w, k10_);
    combo(w, h,
          {{T::a111, &k1_}, {T::a114, &k4_}, {T::a115, &k5_}, {T::a116, &k6_}, {T::a117, &k7_}, {T::a118, &k8_},
           {T::a119, &k9_}, {T::a1110, &k10_}});
    eval(t_ + T::c11 * h, w, k11_);
    combo(w, h,
          {{T::a121, &k1_}, {T::a124, &k4_}, {T::a125, &k5_}, {T::a126, &k6_}, {T::a127, &k7_}, {T::a128, &k8_},
           {T::a129, &k9_}, {T::a1210, &k10_}, {T::a1211, &k11_}});
    eval(t_ + h, w, k12_);
    for (std::size_t i = 0; i < N; ++i) {
      bsum_[i] = T::b1 * k1_[i] + T::b6 * k6_[i] + T::b7 * k7_[i] + T::b8 * k8_[i] + T::b9 * k9_[i] +
                 T::b10 * k10_[i] + T::b11 * k11_[i] + T::b12 * k12_[i];
      y_new_[i] = y_[i] + h * bsum_[i];
    }
  }

  // Hairer's blended 5th/3rd order estimator.
  double error_norm(double h) const {
    using T = detail::Tableau;
    double err = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = 1.0 / weight(i, y_[i], y_new_[i]);
      double e3 = (bsum_[i] - T::bhh1 * k1_[i] - T::bhh2 * k9_[i] - T::bhh3 * k12_[i]) * sk;
      err2 += e3 * e3;
      double e5 = (T::er1 * k1_[i] + T::er6 * k6_[i] + T::er7 * k7_[i] + T::er8 * k8_[i] + T::er9 * k9_[i] +
                   T::er10 * k10_[i] + T::er11 * k11_[i] + T::er12 * k12_[i]) *
                  sk;
      err += e5 * e5;
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    return std::abs(h) * err * std::sqrt(1.0 / (deno * static_cast<double>(N)));
  }

  // Requires k4_ == f(t+h, y_new).
  DenseSegment<N> dense(double h) {
    using T = detail::Tableau;
    DenseSegment<N> seg;
    seg.s0 = t_;
    seg.h = h;
    auto& rc = seg.rc;
    for (std::size_t i = 0; i < N; ++i) {
      rc[0][i] = y_[i];
      const double ydiff = y_new_[i] - y_[i];
      rc[1][i] = ydiff;
      const double bspl = h * k1_[i] - ydiff;
      rc[2][i] = bspl;
      rc[3][i] = ydiff - h * k4_[i] - bspl;
      rc[4][i] = T::d41 * k1_[i] + T::d46 * k6_[i] + T::d47 * k7_[i] + T::d48 * k8_[i] + T::d49 * k9_[i] +
                 T::d410 * k10_[i] + T::d411 * k11_[i] + T::d412 * k12_[i];
      rc[5][i] = T::d51 * k1_[i] + T::d56 * k6_[i] + T::d57 * k7_[i] + T::d58 * k8_[i] + T::d59 * k9_[i] +
                 T::d510 * k10_[i] + T::d511 * k11_[i] + T::d512 * k12_[i];
      rc[6][i] = T::d61 * k1_[i] + T::d66 * k6_[i] + T::d67 * k7_[i] + T::d68 * k8_[i] + T::d69 * k9_[i] +
                 T::d610 * k10_[i] + T::d611 * k11_[i] + T::d612 * k12_[i];
      rc[7][i] = T::d71 * k1_[i] + T::d76 * k6_[i] + T::d77 * k7_[i] + T::d78 * k8_[i] + T::d79 * k9_[i] +
                 T::d710 * k10_[i] + T::d711 * k11_[i] + T::d712 * k12_[i];
    }
    Vec<N> w, k14, k15, k16;
    combo(w, h,
          {{T::a141, &k1_}, {T::a147, &k7_}, {T::a148, &k8_}, {T::a149, &k9_}, {T::a1410, &k10_}, {T::a1411, &k11_},
           {T::a1412, &k12_}, {T::a1413, &k4_}});
    eval(t_ + T::c14 * h, w, k14);
    combo(w, h,
          {{T::a151, &k1_}, {T::a156, &k6_}, {T::a157, &k7_}, {T::a158, &k8_}, {T::a1511, &k11_}, {T::a1512, &k12_},
           {T::a1513, &k4_}, {T::a1514, &k14}});
    eval(t_ + T::c15 * h, w, k15);
    combo(w, h,
          {{T::a161, &k1_}, {T::a166, &k6_}, {T::a167, &k7_}, {T::a168, &k8_}, {T::a169, &k9_}, {T::a1613, &k4_},
           {T::a1614, &k14}, {T::a1615, &k15}});
    eval(t_ + T::c16 * h, w, k16);
    for (std::size_t i = 0; i < N; ++i) {
      rc[4][i] = h * (rc[4][i] + T::d413 * k4_[i] + T::d414 * k14[i] + T::d415 * k15[i] + T::d416 * k16[i]);
      rc[5][i] = h * (rc[5][i] + T::d513 * k4_[i] + T::d514 * k14[i] + T::d515 * k15[i] + T::d516 * k16[i]);
      rc[6][i] = h * (rc[6][i] + T::d613 * k4_[i] + T::d614 * k14[i] + T::d615 * k15[i] + T::d616 * k16[i]);
      rc[7][i] = h * (rc[7][i] + T::d713 * k4_[i] + T::d714 * k14[i] + T::d715 * k15[i] + T::d716 * k16[i]);
    }
    return seg;
  }

  Rhs rhs_;
  StepControl control_;
  Vec<N> cap_;
  StepStats stats_;
  double t_;
  double h_ = 0.0;
  Vec<N> y_;
  Vec<N> y_new_{}, bsum_{};
  Vec<N> k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{}, k8_{}, k9_{}, k10_{}, k11_{}, k12_{};
};

}  // namespace capchan::ode
