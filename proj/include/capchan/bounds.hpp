#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "capchan/classify.hpp"
#include "capchan/error.hpp"
#include "capchan/params.hpp"
#include "capchan/profile.hpp"
#include "capchan/shoot.hpp"

namespace capchan {

// ---------------------------------------------------------------------------
// Comparison arcs

enum class ArcKind { Arc1, Arc2, Arc3 };

/// Lower half of a circle centred on the vertical axis: its lowest point is at
/// height `center_height`.
struct ComparisonArc {
  ArcKind kind = ArcKind::Arc1;
  double center_height = 0.0;
  double radius = 0.0;
};

/// Arc through (0, u0) with the profile's curvature there: radius 1/(kappa u0).
inline ComparisonArc arc1(double kappa, double u0) { return {ArcKind::Arc1, u0, 1.0 / (kappa * u0)}; }

/// Arc through (0, u0) meeting the wall x = a at the contact angle gamma.
inline ComparisonArc arc2(double u0, double a, double gamma) { return {ArcKind::Arc2, u0, a / std::cos(gamma)}; }

/// Arc2 moved down until it touches the profile at the wall, where u(a) = u_a.
inline ComparisonArc arc3(double u0, double a, double gamma, double u_a) {
  const double R = a / std::cos(gamma);
  const double u2_a = u0 + R - std::sqrt(std::max(R * R - a * a, 0.0));
  return {ArcKind::Arc3, u0 - (u2_a - u_a), R};
}

inline double arc_height(const ComparisonArc& arc, double r) {
  if (std::abs(r) > arc.radius) fail(ErrorCode::OutOfDomain, "abscissa beyond the arc radius");
  return arc.center_height + arc.radius - std::sqrt(arc.radius * arc.radius - r * r);
}

// ---------------------------------------------------------------------------
// Closed-form pieces

struct BoundInputs {
  double psi = 0.0;
  double r = 0.0;
  double m = 1.0;
  double p = 1.0;
};

inline BoundInputs bound_inputs(double psi, double r, double kappa) {
  const double m = std::cos(psi / 2.0);
  return {psi, r, m, std::sqrt(1.0 + kappa * (r / m) * (r / m))};
}

/// Area under the arc of radius R through (0, u0) over [0, a]. The square
/// root is clamped at 0 when R is within rounding of a (R2 = a at gamma = 0).
inline double area_F(double u0, double R, double a) {
  const double rad = (R - a < 1e-14 * R) ? 0.0 : std::sqrt(R * R - a * a);
  return a * (R + u0) - 0.5 * a * rad - 0.5 * R * R * std::asin(std::min(1.0, a / R));
}

/// Root of F(u; 1/(kappa u0)) = cos(gamma)/kappa with the radius held at its
/// u0 value; F is linear in u with slope a.
inline double u0_plus(double kappa, double a, double gamma, double u0) {
  return u0 + (std::cos(gamma) / kappa - area_F(u0, 1.0 / (kappa * u0), a)) / a;
}

inline double laplace_lower(double kappa, double a, double gamma) {
  const double c = std::cos(gamma);
  return c / (a * kappa) - a / c + 0.5 * a * std::tan(gamma) + a / (2.0 * c * c) * (kPi / 2.0 - gamma);
}

inline double outer_height_upper(double kappa, double a, double gamma) {
  const double c = std::cos(gamma);
  return c / (kappa * a) - 0.5 * a * std::tan(gamma) + a / (2.0 * c * c) * (kPi / 2.0 - gamma);
}

inline double table_f(double kappa, double a, double gamma) {
  const double c = std::cos(gamma);
  return 2.0 * c / (kappa * a) - 0.5 * a * std::tan(gamma) + a / (2.0 * c * c) * (kPi / 2.0 - gamma);
}

/// q = u(a) - u0 from the first integral, for a wall contact angle gamma.
inline double rise_from_first_integral(double kappa, double u0, double gamma) {
  const double c = (2.0 / kappa) * (1.0 - std::sin(gamma));
  return c / (u0 + std::sqrt(u0 * u0 + c));
}

/// Upper bound on R - r(psi), pi/2 <= psi <= pi, from integrating
/// dr/dpsi > cos(psi)/sqrt(2 kappa (1 - cos psi)).
inline double extent_gap_bound(double kappa, double psi) {
  return (std::sqrt(2.0) + std::log(std::tan(kPi / 8.0)) - 2.0 * std::cos(psi / 2.0) - std::log(std::tan(psi / 4.0))) /
         std::sqrt(kappa);
}

/// The same bound with 1/sqrt(kappa) applied to the constant only.
inline double extent_gap_bound_printed(double kappa, double psi) {
  return (std::sqrt(2.0) + std::log(std::tan(kPi / 8.0))) / std::sqrt(kappa) - 2.0 * std::cos(psi / 2.0) -
         std::log(std::tan(psi / 4.0));
}

// ---------------------------------------------------------------------------
// Reports

enum class BoundStatus { Holds, NearTie, Violated };

inline std::string_view to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Holds: return "Holds";
    case BoundStatus::NearTie: return "NearTie";
    case BoundStatus::Violated: return "Violated";
  }
  return "Unknown";
}

struct BoundReport {
  std::string bound_id;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  BoundStatus status = BoundStatus::Holds;
  double kappa = 0.0;
  std::optional<double> a;
  std::optional<double> gamma;
  double u0 = 0.0;
  /// Abscissa (or angle) where an envelope check was tightest.
  std::optional<double> at;
  std::string diagnostic;
};

inline constexpr double kStrictRel = 1e-7;

/// Collects the sub-checks of one bound; the report keeps the tightest.
class CheckList {
 public:
  /// lhs < rhs, strict up to the 1e-7 relative near-tie band.
  void less(std::string label, double lhs, double rhs, std::optional<double> at = std::nullopt) {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    const double margin = rhs - lhs;
    const double band = kStrictRel * scale;
    BoundStatus st = margin > band ? BoundStatus::Holds
                                   : (std::abs(margin) <= band ? BoundStatus::NearTie : BoundStatus::Violated);
    if (!std::isfinite(margin)) st = BoundStatus::Violated;
    add({std::move(label), lhs, rhs, margin, st, scale > 0.0 ? margin / scale : margin, at});
  }

  /// lhs <= rhs + slack (non-strict statements and attained extremes).
  void less_eq(std::string label, double lhs, double rhs, double slack, std::optional<double> at = std::nullopt) {
    const double margin = rhs - lhs;
    const BoundStatus st = margin >= -slack ? BoundStatus::Holds : BoundStatus::Violated;
    add({std::move(label), lhs, rhs, margin, st, slack > 0.0 ? (margin + slack) / slack : margin, at});
  }

  /// |lhs - rhs| <= tol.
  void equal(std::string label, double lhs, double rhs, double tol, std::optional<double> at = std::nullopt) {
    const double d = std::abs(lhs - rhs);
    const BoundStatus st = d <= tol && std::isfinite(d) ? BoundStatus::Holds : BoundStatus::Violated;
    add({std::move(label), lhs, rhs, rhs - lhs, st, (tol - d) / tol, at});
  }

  /// Strict lhs(r) < rhs(r) over Chebyshev abscissae on [lo, hi]; `sides`
  /// returns {lhs, rhs} at r. Only the tightest abscissa is kept.
  template <class F>
  void envelope(const std::string& label, double lo, double hi, F&& sides, int n = 1000) {
    CheckList local;
    for (int k = 0; k < n; ++k) {
      const double r = lo + (hi - lo) * 0.5 * (1.0 - std::cos((2.0 * k + 1.0) * kPi / (2.0 * n)));
      const auto [l, rr] = sides(r);
      local.less(label, l, rr, r);
    }
    if (local.worst_) add(std::move(*local.worst_));
  }

  void note(std::string text) {
    if (!diagnostic_.empty()) diagnostic_ += "; ";
    diagnostic_ += text;
  }

  [[nodiscard]] bool empty() const { return !worst_; }

  [[nodiscard]] BoundReport report(std::string id) const {
    BoundReport r;
    r.bound_id = std::move(id);
    if (worst_) {
      r.check = worst_->label;
      r.lhs = worst_->lhs;
      r.rhs = worst_->rhs;
      r.margin = worst_->margin;
      r.status = worst_->status;
      r.at = worst_->at;
    }
    r.diagnostic = diagnostic_;
    return r;
  }

  [[nodiscard]] std::size_t count() const { return count_; }

 private:
  struct Item {
    std::string label;
    double lhs, rhs, margin;
    BoundStatus status;
    double score;
    std::optional<double> at;
  };

  static int severity(BoundStatus s) { return s == BoundStatus::Violated ? 2 : (s == BoundStatus::NearTie ? 1 : 0); }

  void add(Item it) {
    ++count_;
    if (!worst_ || severity(it.status) > severity(worst_->status) ||
        (severity(it.status) == severity(worst_->status) && it.score < worst_->score))
      worst_ = it;
  }

  std::optional<Item> worst_;
  std::string diagnostic_;
  std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Per-bound evaluation

enum class BoundFamily { Plate, Free, Pendent };

struct BoundInfo {
  std::string_view id;
  BoundFamily family;
  bool uses_gamma;
  /// Evaluated and reported, but a Violated result is expected and does not
  /// count against the suite.
  bool quarantined = false;
};

inline constexpr std::array<BoundInfo, 17> kBoundRegistry{{
    {"B1", BoundFamily::Free, false},   {"B2", BoundFamily::Free, false},  {"B3", BoundFamily::Free, true},
    {"B4", BoundFamily::Plate, true},   {"B5", BoundFamily::Plate, true},  {"B6", BoundFamily::Plate, true},
    {"B7", BoundFamily::Plate, true},   {"B8", BoundFamily::Plate, true},  {"B9", BoundFamily::Plate, true},
    {"B10", BoundFamily::Plate, true},  {"B11", BoundFamily::Free, true},  {"B12", BoundFamily::Plate, true, true},
    {"B13", BoundFamily::Plate, true},  {"B14", BoundFamily::Free, true},  {"B15", BoundFamily::Free, true},
    {"B16", BoundFamily::Free, true},   {"B17", BoundFamily::Pendent, false},
}};

inline const BoundInfo& bound_info(std::string_view id) {
  for (const auto& b : kBoundRegistry)
    if (b.id == id) return b;
  fail(ErrorCode::UnknownBound, "no bound named " + std::string(id));
}

/// Registry position, used to order reports (B2 before B10).
inline std::size_t bound_index(std::string_view id) {
  for (std::size_t i = 0; i < kBoundRegistry.size(); ++i)
    if (kBoundRegistry[i].id == id) return i;
  fail(ErrorCode::UnknownBound, "no bound named " + std::string(id));
}

inline std::vector<std::string> all_bound_ids() {
  std::vector<std::string> out;
  for (const auto& b : kBoundRegistry) out.emplace_back(b.id);
  return out;
}

/// Lazily computed profiles shared by the bounds evaluated at one parameter
/// point, so a grid point shoots or integrates each case once.
class BoundContext {
 public:
  BoundContext(FluidParams params, double u0, IntegratorOptions opts = {})
      : params_(std::move(params)), u0_(u0), opts_(std::move(opts)) {}

  [[nodiscard]] const FluidParams& params() const { return params_; }
  [[nodiscard]] double kappa() const { return params_.kappa; }
  [[nodiscard]] double u0() const { return u0_; }
  [[nodiscard]] const IntegratorOptions& options() const { return opts_; }

  struct Plate {
    ShootResult shot;
    double a = 0.0;
    double gamma = 0.0;
    Profile profile;  // from the centre to the first vertical point and a bit beyond
    double s_vertical = 0.0;
    ProfileState wall;
  };

  const Plate& plate(double a_override = 0.0) {
    const double a = a_override > 0.0 ? a_override : params_.a();
    auto& slot = a_override > 0.0 ? plate2_ : plate_;
    if (!slot) {
      const double kappa = params_.kappa;
      const double gamma = params_.contact_angle();
      if (!(kappa > 0.0)) fail(ErrorCode::WrongRegime, "plate bounds need kappa > 0");
      if (!(gamma < kPi / 2.0)) fail(ErrorCode::WrongRegime, "plate bounds need gamma < pi/2");
      const ShootResult shot = shoot_contact_angle(kappa, a, gamma, opts_);
      IntegratorOptions o = opts_;
      o.events = EventSet::none();
      o.angle_targets = {kPi / 6.0, kPi / 3.0, kPi / 2.0, kPi / 2.0 - gamma};
      Profile p = integrate_to_angle(shot.u0, kappa, kPi / 2.0 + 0.05, o);
      const auto v = p.first_at_level(EventKind::AngleHit, kPi / 2.0);
      if (!v) fail(ErrorCode::NoEvent, "shot profile has no vertical point");
      const double sv = v->s;
      const ProfileState wall = GraphView(p, sv).at_x(a);
      slot.emplace(Plate{shot, a, gamma, std::move(p), sv, wall});
    }
    return *slot;
  }

  struct Free {
    Profile profile;  // from u0 to a little past inclination pi
    [[nodiscard]] ProfileState hit(double psi) const {
      const auto e = profile.first_at_level(EventKind::AngleHit, psi);
      if (!e) fail(ErrorCode::NoEvent, "inclination " + std::to_string(psi) + " not reached");
      return e->state;
    }
  };

  /// Wall angle psi_w = pi/2 - gamma and the supplementary pair used by the
  /// channel bounds: gamma_lo in [0, pi/2], gamma_hi = pi - gamma_lo.
  [[nodiscard]] double gamma_lo() const {
    const double g = params_.contact_angle();
    return std::min(g, kPi - g);
  }
  [[nodiscard]] double gamma_hi() const { return kPi - gamma_lo(); }

  const Free& free() {
    if (!free_) {
      const double kappa = params_.kappa;
      if (!(kappa > 0.0)) fail(ErrorCode::WrongRegime, "sessile bounds need kappa > 0");
      if (!(u0_ > 0.0)) fail(ErrorCode::WrongRegime, "sessile bounds need u0 > 0");
      IntegratorOptions o = opts_;
      o.events = EventSet::none();
      o.angle_targets = {kPi / 6.0, kPi / 3.0, kPi / 2.0, kPi};
      for (double d : kRichardsonDeltas) o.angle_targets.push_back(kPi - d);
      if (params_.gamma) {
        const double g = gamma_lo();
        if (g > 0.0) o.angle_targets.push_back(g);
        o.angle_targets.push_back(kPi - g);
        if (kPi / 2.0 - g > 0.0) o.angle_targets.push_back(kPi / 2.0 - g);
      }
      free_.emplace(Free{integrate_to_angle(u0_, kappa, kPi + 0.05, o)});
    }
    return *free_;
  }

 private:
  FluidParams params_;
  double u0_;
  IntegratorOptions opts_;
  std::optional<Plate> plate_;
  std::optional<Plate> plate2_;
  std::optional<Free> free_;
};

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// B1: first integral along sessile and pendent trajectories.
inline void check_B1(BoundContext& ctx, CheckList& out) {
  const double k = std::abs(ctx.kappa()), u0 = std::abs(ctx.u0());
  if (!(u0 > 0.0)) fail(ErrorCode::WrongRegime, "first-integral check needs u0 != 0");
  IntegratorOptions o = ctx.options();
  o.events = EventSet::none();
  o.events.vertical_point = true;
  const double length = 4.0 * kPi / (k * u0) + 4.0 * capillary_length(k);
  for (const double sign : {1.0, -1.0}) {
    const double kappa = sign * k, z = sign * u0;
    const Profile p = integrate(z, kappa, std::min(length, 50.0 * capillary_length(k)), o);
    const std::string tag = sign > 0 ? "kappa>0" : "kappa<0";
    out.equal("first integral " + tag, max_first_integral_residual(p), 0.0, 1e-8);
    if (const auto v = p.first(EventKind::VerticalPoint)) {
      const double h2 = height_squared_from_theta(kPi / 2.0, z, kappa);
      out.equal("height at vertical point " + tag, v->state.z * v->state.z, h2, 1e-8);
    }
  }
}

// B2: z0 <= z <= sqrt(4/kappa + z0^2) over a period, both ends attained.
inline void check_B2(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa(), u0 = ctx.u0();
  if (!(kappa > 0.0 && u0 > 0.0)) fail(ErrorCode::WrongRegime, "sessile height bounds need kappa > 0, u0 > 0");
  IntegratorOptions o = ctx.options();
  o.events = EventSet::none();
  o.events.height_extremum = true;
  const Stop stop{[](const ProfileState& st) { return st.theta - 2.0 * kPi - 0.1; }, +1};
  const Profile p = integrate_until(u0, kappa, detail::winding_arclength_bound(u0, kappa) * 1.2,
                                    std::span<const Stop>(&stop, 1), o);
  const double top = std::sqrt(4.0 / kappa + u0 * u0);
  double zmin = u0, zmax = u0;
  for (const auto& st : p.samples()) {
    zmin = std::min(zmin, st.z);
    zmax = std::max(zmax, st.z);
  }
  for (const auto& e : p.events()) {
    zmin = std::min(zmin, e.state.z);
    zmax = std::max(zmax, e.state.z);
  }
  out.less_eq("z >= z0", u0, zmin, 1e-9 * top);
  out.less_eq("z <= sqrt(4/kappa+z0^2)", zmax, top, 1e-9 * top);
  const auto peak = p.first_at_level(EventKind::HeightExtremum, kPi);
  const auto trough = p.first_at_level(EventKind::HeightExtremum, 2.0 * kPi);
  if (!peak || !trough) fail(ErrorCode::NoEvent, "period extremes not reached");
  out.equal("maximum attained", peak->state.z, top, 1e-6);
  out.equal("minimum attained", trough->state.z, u0, 1e-6);
}

// B3: wall rise q from the first integral, and its limits in u0.
inline void check_B3(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa(), u0 = ctx.u0(), gamma = ctx.gamma_lo();
  if (!(gamma < kPi / 2.0)) fail(ErrorCode::WrongRegime, "wall rise needs gamma < pi/2");
  const double psi_w = kPi / 2.0 - gamma;
  const ProfileState w = ctx.free().hit(psi_w);
  const double q = w.z - u0;
  const double c = (2.0 / kappa) * (1.0 - std::sin(gamma));
  out.equal("q identity", q, rise_from_first_integral(kappa, u0, gamma), 1e-8);
  out.less("q < sqrt((2/kappa)(1-sin g))", q, std::sqrt(c));
  auto rise = [&](double v) { return integrate_to_angle(v, kappa, psi_w, ctx.options()).back().z - v; };
  const double q_small = rise(1e-3), q_big = rise(1e3);
  // q = c/(u0 + sqrt(u0^2 + c)): within u0 of sqrt(c) and below c/(2 u0).
  out.less_eq("q -> sqrt(c) as u0 -> 0", std::sqrt(c) - q_small, 1e-3, 1e-9);
  out.less_eq("q -> 0 as u0 -> inf", q_big, c / (2.0 * 1e3), 1e-9);
}

// B4: kappa u0 < sin(psi)/r < kappa u(r) on (0, a], and the r -> 0 limit.
inline void check_B4(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), u0 = pl.shot.u0, a = pl.a;
  const GraphView g(pl.profile, pl.s_vertical);
  out.envelope("kappa u0 < sin(psi)/r", 0.02 * a, a, [&](double r) {
    const auto st = g.at_x(r);
    return std::pair{kappa * u0, std::sin(st.theta) / st.x};
  });
  out.envelope("sin(psi)/r < kappa u(r)", 0.02 * a, a, [&](double r) {
    const auto st = g.at_x(r);
    return std::pair{std::sin(st.theta) / st.x, kappa * st.z};
  });
  const auto st = g.at_x(1e-4 * a);
  out.equal("sin(psi)/r -> kappa u0", std::sin(st.theta) / st.x, kappa * u0, 1e-6 * kappa * u0);
}

// B5: u1(r) < u(r) < u2(r) on (0, a], compared as rises above u0.
inline void check_B5(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), u0 = pl.shot.u0, a = pl.a;
  const GraphView g(pl.profile, pl.s_vertical);
  const auto c1 = arc1(kappa, u0), c2 = arc2(u0, a, pl.gamma);
  // All three curves start at (0, u0); r < 0.02 a is left out because the
  // gaps vanish like r^4 there.
  out.envelope("u1 < u", 0.02 * a, a, [&](double r) {
    return std::pair{arc_height(c1, r) - u0, g.u(r) - u0};
  });
  out.envelope("u < u2", 0.02 * a, a, [&](double r) {
    return std::pair{g.u(r) - u0, arc_height(c2, r) - u0};
  });
}

// B6: two-sided bounds on q = u(a) - u0.
inline void check_B6(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), u0 = pl.shot.u0, a = pl.a, gamma = pl.gamma;
  const double q = pl.wall.z - u0;
  const double s = std::sin(gamma), c = std::cos(gamma);
  out.less("q2 lower", (1.0 - std::sqrt(1.0 - a * a * kappa * kappa * u0 * u0)) / (kappa * u0), q);
  out.less("q2 upper", q, a / c * (1.0 - s));
  out.less("q3 lower", 2.0 * a * (1.0 - s) / (1.0 + std::sqrt(1.0 + 2.0 * kappa * a * a * (1.0 - s))), q);
  if (gamma == 0.0) {
    out.less("gamma=0 lower", 2.0 * a / (1.0 + std::sqrt(1.0 + 2.0 * kappa * a * a)), q);
    out.less("gamma=0 upper", q, std::min(a, std::sqrt(2.0 / kappa)));
  }
}

// B7: area comparisons through F and the centre-height chain.
inline void check_B7(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), u0 = pl.shot.u0, a = pl.a, gamma = pl.gamma;
  const double c = std::cos(gamma);
  const double area = integrate_along(pl.profile, 0.0, pl.wall.s,
                                      [](const ProfileState& st) { return st.z * std::cos(st.theta); });
  out.equal("kappa * int_0^a u = cos g", kappa * area, c, 1e-8);
  out.less("(A) F(u0;R1) < cos g/kappa", area_F(u0, 1.0 / (kappa * u0), a), c / kappa);
  out.less("(B) cos g/kappa < F(u0;R2)", c / kappa, area_F(u0, a / c, a));
  const double up = u0_plus(kappa, a, gamma, u0);
  out.less("laplace lower < u0", laplace_lower(kappa, a, gamma), u0);
  out.less("u0 < u0+", u0, up);
  out.less("u0+ < cos g/(a kappa)", up, c / (a * kappa));
}

// B8: outer height bound.
inline void check_B8(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  out.less("u(a) < bound", pl.wall.z, outer_height_upper(ctx.kappa(), pl.a, pl.gamma));
}

// B9: pointwise envelopes of the meniscus on (0, a).
inline void check_B9(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), u0 = pl.shot.u0, a = pl.a, gamma = pl.gamma;
  const GraphView g(pl.profile, pl.s_vertical);
  const double R2 = a / std::cos(gamma);
  const double k2 = kappa * kappa * u0 * u0;
  out.envelope("meniscus lower", 0.02 * a, a, [&](double r) {
    return std::pair{r * r * kappa * u0 / (1.0 + std::sqrt(1.0 - r * r * k2)), g.u(r) - u0};
  });
  out.envelope("meniscus upper", 0.02 * a, a, [&](double r) {
    return std::pair{g.u(r) - u0, R2 - std::sqrt(R2 * R2 - r * r)};
  });
  // The displaced arc u3 touches the profile at the wall and lies below it.
  const double ua = pl.wall.z, t = a * std::tan(gamma);
  out.envelope("displaced arc below u", 0.0, 0.98 * a, [&](double r) {
    return std::pair{ua + t - std::sqrt(R2 * R2 - r * r), g.u(r)};
  });
  // The same inequality with u0 subtracted on the right fails at r = a,
  // where it reads u(a) < u(a) - u0.
  CheckList printed;
  printed.envelope("printed", 0.0, a, [&](double r) {
    return std::pair{ua + t - std::sqrt(R2 * R2 - r * r), g.u(r) - u0};
  });
  const auto pr = printed.report("B9");
  if (pr.status != BoundStatus::Holds)
    out.note("form with u(r)-u0 on the right: " + std::string(to_string(pr.status)) + ", margin " + num(pr.margin) +
             " at r=" + num(pr.at.value_or(0.0)));
}

// B10: u^2 - u0^2 = (2/kappa)(1 - cos psi) at the wall inclination, for
// widths a and 2a. Compared at the exact inclination hit: the shot wall
// angle is only as good as the shooting residual, which near gamma = 0 is
// amplified by 1/cos(psi).
inline void check_B10(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa();
  const auto& p1 = ctx.plate();
  const auto& p2 = ctx.plate(2.0 * p1.a);
  const double psi = kPi / 2.0 - p1.gamma;
  const double rhs = (2.0 / kappa) * (1.0 - std::cos(psi));
  auto lhs = [&](const BoundContext::Plate& pl) {
    const auto e = pl.profile.first_at_level(EventKind::AngleHit, psi);
    if (!e) fail(ErrorCode::NoEvent, "wall inclination not reached");
    return e->state.z * e->state.z - pl.shot.u0 * pl.shot.u0;
  };
  const double l1 = lhs(p1), l2 = lhs(p2);
  out.equal("identity width a", l1, rhs, 1e-8);
  out.equal("identity width 2a", l2, rhs, 1e-8);
  out.equal("width independence", l1, l2, 1e-8);
}

// B11: u(psi) < sqrt((sin psi/(kappa r))^2 + (2/kappa)(1 - cos psi)).
inline void check_B11(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa();
  const auto& f = ctx.free();
  std::vector<double> angles{kPi / 6.0, kPi / 3.0, kPi / 2.0};
  if (ctx.params().gamma && ctx.gamma_lo() > 0.0) angles.push_back(kPi / 2.0 - ctx.gamma_lo());
  for (double psi : angles) {
    const auto st = f.hit(psi);
    const double sr = std::sin(psi) / (kappa * st.x);
    out.less("u(psi) bound", st.z, std::sqrt(sr * sr + (2.0 / kappa) * (1.0 - std::cos(psi))), psi);
  }
}

// B12: lower bound on u0 evaluated exactly as printed (quarantined).
inline void check_B12(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), u0 = pl.shot.u0;
  std::string diag;
  for (double psi : {kPi / 6.0, kPi / 3.0, kPi / 2.0}) {
    const auto e = pl.profile.first_at_level(EventKind::AngleHit, psi);
    if (!e) fail(ErrorCode::NoEvent, "inclination not reached");
    const auto in = bound_inputs(psi, e->state.x, kappa);
    const double base = std::sin(psi) / (2.0 * kappa * in.r) * (1.0 + in.p) * std::exp(1.0 - in.p);
    const double printed = base * kappa / in.m;
    out.less("printed lower bound", printed, u0, psi);
    if (!diag.empty()) diag += ", ";
    diag += "psi=" + num(psi) + ": printed " + num(printed) + ", without kappa/m " + num(base) +
            (base < u0 ? " (below u0)" : " (above u0)");
  }
  out.note("u0=" + num(u0) + "; " + diag);
}

// B13: sandwich on u(a) - u0.
inline void check_B13(BoundContext& ctx, CheckList& out) {
  const auto& pl = ctx.plate();
  const double kappa = ctx.kappa(), a = pl.a, gamma = pl.gamma;
  const double d = pl.wall.z - pl.shot.u0;
  const double s = std::sin(gamma);
  out.less("lower", 2.0 * (1.0 - s) / (kappa * table_f(kappa, a, gamma)), d);
  out.less("upper", d, a * (1.0 - s) / std::cos(gamma));
}

// B14: channel volume bounds.
inline void check_B14(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa();
  const auto& f = ctx.free();
  const double g = ctx.gamma_lo(), G = ctx.gamma_hi();
  auto vol = [&](const ProfileState& st, double psi) { return 2.0 * (st.x * st.z - std::sin(psi) / kappa); };
  if (g > 0.0) {
    const auto st = f.hit(g);
    const double V = vol(st, g), w = g - std::sin(g) * std::cos(g);
    out.less("v1", V, st.x * st.x / (std::sin(g) * std::sin(g)) * w, g);
    out.less("v3", w / (kappa * kappa * st.z * st.z), V, g);
  }
  const auto sv = f.hit(kPi / 2.0);
  const auto sG = f.hit(G);
  out.less("v2", vol(sG, G), sv.x * sv.x * (G - std::sin(G) * std::cos(G)), G);
  std::array<double, 3> r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = f.hit(kPi - kRichardsonDeltas[i]).x;
  out.less("r_o > 0", 0.0, richardson_limit(r));
}

// B15: estimates in the inclination parameter, including psi beyond pi/2.
inline void check_B15(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa(), u0 = ctx.u0();
  const auto& f = ctx.free();
  const double G = ctx.gamma_hi();
  std::vector<double> angles{kPi / 2.0, G, kPi};
  if (ctx.gamma_lo() > 0.0) angles.push_back(ctx.gamma_lo());
  for (double psi : angles)
    out.less("u(psi) - u0", f.hit(psi).z - u0, std::sqrt(2.0 * (1.0 - std::cos(psi)) / kappa), psi);
  const auto sv = f.hit(kPi / 2.0), sG = f.hit(G), sp = f.hit(kPi);
  const double gap = sv.x - sG.x;
  out.less("R - r(psi)", gap, extent_gap_bound(kappa, G), G);
  const double printed = extent_gap_bound_printed(kappa, G);
  if (!(gap < printed))
    out.note("R - r(psi) with 1/sqrt(kappa) on the constant only: " + num(printed) + " vs " + num(gap) +
             " at psi=" + num(G));
  out.less("u(psi) - u(R)", sG.z - sv.z, (std::sqrt(2.0 * (1.0 - std::cos(G))) - std::sqrt(2.0)) / std::sqrt(kappa), G);
  std::array<double, 3> r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = f.hit(kPi - kRichardsonDeltas[i]).x;
  out.less("R - r_o", sv.x - richardson_limit(r), std::sqrt(2.0 / kappa));
  out.less("u(pi) - u(R)", sp.z - sv.z, (2.0 - std::sqrt(2.0)) / std::sqrt(kappa));
}

// B16: sandwich on R - r(gamma) for gamma in [pi/2, pi].
inline void check_B16(BoundContext& ctx, CheckList& out) {
  const double kappa = ctx.kappa(), u0 = ctx.u0();
  const auto& f = ctx.free();
  const double G = ctx.gamma_hi();
  const double gap = f.hit(kPi / 2.0).x - f.hit(G).x;
  const double num_ = (1.0 - std::sin(G)) / std::sqrt(kappa);
  out.less("lower", num_ / std::sqrt(2.0 * (1.0 - std::cos(G)) + kappa * u0 * u0), gap, G);
  out.less("upper", gap, num_ / std::sqrt(2.0 + kappa * u0 * u0), G);
}

// B17: pendent profiles, kappa -> -|kappa| and z0 = -|u0|.
inline void check_B17(BoundContext& ctx, CheckList& out) {
  const double kappa = -std::abs(ctx.kappa()), z0 = -std::abs(ctx.u0());
  if (z0 == 0.0) fail(ErrorCode::WrongRegime, "pendent checks need u0 != 0");
  const Regime regime = classify(z0, kappa);
  if (regime.tag == RegimeTag::PendentAsymptotic) fail(ErrorCode::WrongRegime, "asymptotic pendent profile");
  IntegratorOptions o = ctx.options();
  o.events = EventSet::none();
  o.events.vertical_point = true;
  o.events.z_zero = true;
  // The initial arc: from the bottom to the first vertical point or zero.
  const std::array<Stop, 2> stops{Stop{[](const ProfileState& st) { return st.theta - kPi / 2.0; }, +1},
                                  Stop{[](const ProfileState& st) { return st.z; }, +1}};
  const Profile arc = integrate_until(z0, kappa, 1e4 * capillary_length(kappa), stops, o);
  if (!arc.stop_index()) fail(ErrorCode::NoEvent, "initial arc did not end");
  const ProfileState end = arc.back();
  const bool vertical = arc.stop_index() == std::size_t{0};
  const GraphView g(arc, end.s);
  const double ku0 = kappa * z0;
  out.envelope("kappa u(r) < sin(psi)/r", 0.02 * end.x, end.x, [&](double r) {
    const auto st = g.at_x(r);
    return std::pair{kappa * st.z, std::sin(st.theta) / st.x};
  });
  out.envelope("sin(psi)/r < kappa u0", 0.02 * end.x, end.x, [&](double r) {
    const auto st = g.at_x(r);
    return std::pair{std::sin(st.theta) / st.x, ku0};
  });
  if (vertical) out.less("graph up to r = 1/(kappa u0)", 1.0 / ku0, end.x);
  // Exclusion of r u <= 1/kappa along the initial arc (samples in s).
  {
    CheckList local;
    for (int i = 1; i <= 1000; ++i) {
      const auto st = arc.at(end.s * i / 1000.0);
      local.less("r u > 1/kappa", 1.0 / kappa, st.x * st.z, st.s);
    }
    const auto rep = local.report("B17");
    out.less(rep.check, rep.lhs, rep.rhs, rep.at);
  }

  if (regime.tag == RegimeTag::PendentGraph && !regime.has(BoundaryFlag::OnGraphBoundary)) {
    const double R = end.x;
    out.less("RR lower", 1.0 / std::sqrt(-2.0 * kappa), R);
    out.less("RR upper", R, std::sqrt(-2.0 * std::numbers::e / kappa));
  }
  if (z0 * z0 > -2.0 / kappa && vertical) {
    out.less_eq("r(pi/2) <= pi/(2 sqrt(-2 kappa))", end.x, kPi / (2.0 * std::sqrt(-2.0 * kappa)), 0.0);
  }
  if (regime.tag == RegimeTag::PendentOscillatingVertical) {
    const double h = std::sqrt(z0 * z0 + 2.0 / kappa);
    for (const auto& v : vertical_points(z0, kappa, ctx.options()))
      out.equal("vertical point height", std::abs(v.z), h, 1e-8, v.s);
  }
}

inline void run_check(std::string_view id, BoundContext& ctx, CheckList& out) {
  static const std::map<std::string_view, void (*)(BoundContext&, CheckList&)> table{
      {"B1", check_B1},   {"B2", check_B2},   {"B3", check_B3},   {"B4", check_B4},   {"B5", check_B5},
      {"B6", check_B6},   {"B7", check_B7},   {"B8", check_B8},   {"B9", check_B9},   {"B10", check_B10},
      {"B11", check_B11}, {"B12", check_B12}, {"B13", check_B13}, {"B14", check_B14}, {"B15", check_B15},
      {"B16", check_B16}, {"B17", check_B17}};
  const auto it = table.find(id);
  if (it == table.end()) fail(ErrorCode::UnknownBound, "no bound named " + std::string(id));
  it->second(ctx, out);
}

inline BoundReport make_report(std::string_view id, const BoundContext& ctx, const CheckList& checks) {
  BoundReport r = checks.report(std::string(id));
  const auto& info = bound_info(id);
  r.kappa = info.family == BoundFamily::Pendent ? -std::abs(ctx.kappa()) : ctx.kappa();
  r.u0 = info.family == BoundFamily::Pendent ? -std::abs(ctx.u0()) : ctx.u0();
  if (info.uses_gamma) r.gamma = ctx.params().gamma;
  if (info.family == BoundFamily::Plate) {
    r.a = ctx.params().half_width_a;
    r.u0 = const_cast<BoundContext&>(ctx).plate().shot.u0;
  }
  return r;
}

}  // namespace detail

/// Evaluates one registry bound. Plate bounds (B4-B10, B12, B13) shoot the
/// centre height from (kappa, a, gamma) and ignore `u0`; the others
/// integrate the free profile starting at `u0`.
inline BoundReport evaluate_bound(std::string_view bound_id, BoundContext& ctx) {
  bound_info(bound_id);
  CheckList checks;
  detail::run_check(bound_id, ctx, checks);
  return detail::make_report(bound_id, ctx, checks);
}

inline BoundReport evaluate_bound(std::string_view bound_id, const FluidParams& params, double u0,
                                  const IntegratorOptions& opts = {}) {
  params.validate();
  BoundContext ctx(params, u0, opts);
  return evaluate_bound(bound_id, ctx);
}

/// kappa V_b = 2 b cos(gamma) + 4 a evaluated as written, with V_b the
/// liquid volume over (-a, a) x (-b/2, b/2) under the plate solution.
inline BoundReport volume_identity_check(double kappa, double a, double gamma, double b,
                                         const IntegratorOptions& opts = {}) {
  FluidParams{kappa, a, gamma}.validate();
  if (!(kappa > 0.0)) fail(ErrorCode::WrongRegime, "volume identity needs kappa > 0");
  if (!(b > 0.0)) fail(ErrorCode::InvalidParams, "strip length b must be positive");
  const ShootResult shot = shoot_contact_angle_any(kappa, a, gamma, opts);
  double area = 0.0;
  if (shot.u0 != 0.0) {
    const Profile p = integrate_to_wall(shot.u0, kappa, a, opts);
    if (p.stop_index() != std::size_t{0}) fail(ErrorCode::NoEvent, "plate solution did not reach the wall");
    area = integrate_along(p, 0.0, p.back().s, [](const ProfileState& st) { return st.z * std::cos(st.theta); });
  }
  const double Vb = 2.0 * b * area;
  const double lhs = kappa * Vb, rhs = 2.0 * b * std::cos(gamma) + 4.0 * a;
  CheckList checks;
  checks.equal("kappa V_b = 2 b cos g + 4 a", lhs, rhs, 1e-8 * std::max(1.0, std::abs(rhs)));
  checks.note("residual " + detail::num(lhs - rhs) + " (-4a = " + detail::num(-4.0 * a) + "); without the 4a term: " +
              detail::num(lhs - 2.0 * b * std::cos(gamma)));
  BoundReport r = checks.report("VOLUME_IDENTITY");
  r.kappa = kappa;
  r.a = a;
  r.gamma = gamma;
  r.u0 = shot.u0;
  return r;
}

// ---------------------------------------------------------------------------
// Suite

struct SuiteConfig {
  std::array<double, 2> kappa_range{0.1, 10.0};
  std::size_t kappa_count = 20;
  std::array<double, 2> gamma_range{0.0, kPi / 2.0};
  std::size_t gamma_count = 20;
  std::array<double, 2> u0_range{0.25, 2.0};
  std::size_t u0_count = 3;
  std::uint64_t seed = 0;
  std::vector<std::string> bounds = all_bound_ids();
  double half_width = 1.0;
  unsigned threads = 1;
};

struct SuiteGrid {
  std::vector<double> kappa;
  std::vector<double> gamma;
  std::vector<double> u0;
};

/// Cell-jittered grid: value i sits at fraction (i + xi_i)/n of the range,
/// with xi_0 = 0 so every axis starts exactly at its lower end. kappa and u0
/// are spaced in log, gamma linearly; the upper ends stay excluded.
inline SuiteGrid suite_grid(const SuiteConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto axis = [&](std::array<double, 2> range, std::size_t n, bool log_spaced) {
    std::vector<double> v;
    if (log_spaced && !(range[0] > 0.0 && range[1] > 0.0))
      fail(ErrorCode::InvalidParams, "log-spaced range needs positive ends");
    const double lo = log_spaced ? std::log(range[0]) : range[0];
    const double hi = log_spaced ? std::log(range[1]) : range[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = i == 0 ? 0.0 : static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double t = lo + (hi - lo) * (static_cast<double>(i) + xi) / static_cast<double>(n);
      v.push_back(log_spaced ? std::exp(t) : t);
    }
    return v;
  };
  SuiteGrid g;
  g.kappa = axis(cfg.kappa_range, cfg.kappa_count, true);
  g.gamma = axis(cfg.gamma_range, cfg.gamma_count, false);
  g.u0 = axis(cfg.u0_range, cfg.u0_count, true);
  return g;
}

struct SuiteResult {
  std::vector<BoundReport> reports;
  std::size_t holds = 0;
  std::size_t near_tie = 0;
  std::size_t violated = 0;
  std::size_t skipped = 0;
};

/// Evaluates every requested bound over the grid. Plate bounds run on the
/// kappa x gamma grid at the configured half-width, B1, B2 and B17 (which do
/// not involve gamma) on kappa x u0, the rest on kappa x gamma x u0. Reports
/// are ordered by registry position, then grid index, independent of threads.
inline SuiteResult verify_suite(const SuiteConfig& cfg, const IntegratorOptions& opts = {}) {
  for (const auto& id : cfg.bounds) bound_info(id);
  const SuiteGrid grid = suite_grid(cfg);
  const std::size_t nk = grid.kappa.size(), ng = grid.gamma.size(), nu = grid.u0.size();

  struct Task {
    std::size_t bound;
    std::size_t index;
    double kappa;
    std::optional<double> a;
    std::optional<double> gamma;
    double u0;
  };
  // Tasks sharing a parameter point are grouped so their context is reused.
  struct Group {
    FluidParams params;
    double u0;
    std::vector<std::size_t> tasks;
  };
  std::vector<Task> tasks;
  std::vector<Group> groups;
  std::map<std::tuple<int, std::size_t>, std::size_t> group_of;

  std::vector<std::size_t> ids;
  for (const auto& id : cfg.bounds) ids.push_back(bound_index(id));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  for (std::size_t b : ids) {
    const auto& info = kBoundRegistry[b];
    auto add = [&](int fam, std::size_t index, FluidParams params, double u0) {
      const auto key = std::make_tuple(fam, index);
      auto it = group_of.find(key);
      if (it == group_of.end()) {
        it = group_of.emplace(key, groups.size()).first;
        groups.push_back({params, u0, {}});
      }
      groups[it->second].tasks.push_back(tasks.size());
      tasks.push_back({b, index, params.kappa, params.half_width_a, params.gamma, u0});
    };
    if (info.family == BoundFamily::Plate) {
      for (std::size_t i = 0; i < nk; ++i)
        for (std::size_t j = 0; j < ng; ++j)
          add(0, i * ng + j, FluidParams{grid.kappa[i], cfg.half_width, grid.gamma[j]}, 0.0);
    } else if (!info.uses_gamma) {
      for (std::size_t i = 0; i < nk; ++i)
        for (std::size_t k = 0; k < nu; ++k) add(1, i * nu + k, FluidParams{grid.kappa[i], std::nullopt, std::nullopt}, grid.u0[k]);
    } else {
      for (std::size_t i = 0; i < nk; ++i)
        for (std::size_t j = 0; j < ng; ++j)
          for (std::size_t k = 0; k < nu; ++k)
            add(2, (i * ng + j) * nu + k, FluidParams{grid.kappa[i], std::nullopt, grid.gamma[j]}, grid.u0[k]);
    }
  }

  std::vector<std::optional<BoundReport>> results(tasks.size());
  auto run_group = [&](const Group& g) {
    BoundContext ctx(g.params, g.u0, opts);
    for (std::size_t t : g.tasks) {
      const auto id = kBoundRegistry[tasks[t].bound].id;
      try {
        results[t] = evaluate_bound(id, ctx);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::WrongRegime) continue;
        BoundReport r;
        r.bound_id = std::string(id);
        r.check = "evaluation";
        r.status = BoundStatus::Violated;
        r.kappa = tasks[t].kappa;
        r.a = tasks[t].a;
        r.gamma = tasks[t].gamma;
        r.u0 = tasks[t].u0;
        r.lhs = r.rhs = r.margin = std::numeric_limits<double>::quiet_NaN();
        r.diagnostic = e.what();
        results[t] = std::move(r);
      }
    }
  };

  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1) {
    for (const auto& g : groups) run_group(g);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < groups.size(); i = next++) run_group(groups[i]);
      });
    for (auto& th : pool) th.join();
  }

  // Tasks were created bound-major, then by grid index.
  SuiteResult out;
  for (auto& r : results) {
    if (!r) {
      ++out.skipped;
      continue;
    }
    switch (r->status) {
      case BoundStatus::Holds: ++out.holds; break;
      case BoundStatus::NearTie: ++out.near_tie; break;
      case BoundStatus::Violated: ++out.violated; break;
    }
    out.reports.push_back(std::move(*r));
  }
  return out;
}

}  // namespace capchan
