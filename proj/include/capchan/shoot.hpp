#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capchan/classify.hpp"
#include "capchan/error.hpp"
#include "capchan/params.hpp"
#include "capchan/profile.hpp"

namespace capchan {

struct ShootResult {
  double u0 = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr double kShootTol = 1e-9;

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidParams, std::string(name) + " must be positive");
}

inline double angle_arclength_bound(double u0, double kappa, double psi) {
  // theta' = kappa z >= kappa u0 on a sessile profile starting at its bottom.
  return psi / (kappa * u0) * 1.01 + capillary_length(kappa);
}

/// Plain bisection on a function that is negative at `lo` and positive at
/// `hi`; stops when the bracket cannot be halved any further.
template <class F>
ShootResult bisect_increasing(F&& f, double lo, double hi, double flo, double fhi) {
  ShootResult out;
  for (; out.iterations < 400; ++out.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      flo = fhi = 0.0;
      break;
    }
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  out.lo = lo;
  out.hi = hi;
  if (std::abs(flo) <= std::abs(fhi)) {
    out.u0 = lo;
    out.residual = std::abs(flo);
  } else {
    out.u0 = hi;
    out.residual = std::abs(fhi);
  }
  return out;
}

}  // namespace detail

/// Profile from u0 up to the wall x = a, or up to its first vertical point if
/// that comes first. `stop_index() == 0` means the wall was reached.
inline Profile integrate_to_wall(double u0, double kappa, double a, const IntegratorOptions& opts = {}) {
  const std::array<Stop, 2> stops{Stop{[a](const ProfileState& st) { return st.x - a; }, +1},
                                  Stop{[](const ProfileState& st) { return st.theta - kPi / 2.0; }, +1}};
  IntegratorOptions o = opts;
  o.events = EventSet::none();
  return integrate_until(u0, kappa, 4.0 * (a + capillary_length(kappa)), stops, o);
}

/// sin(psi(a)) - cos(gamma). A profile that turns vertical at x_v < a
/// overshoots every contact angle; it gets 1 - cos(gamma) + (a - x_v)/a, which
/// keeps the residual continuous in u0 (and zero at the gamma = 0 root).
inline double contact_angle_residual(double u0, double kappa, double a, double gamma,
                                     const IntegratorOptions& opts = {}) {
  const Profile p = integrate_to_wall(u0, kappa, a, opts);
  if (p.stop_index() != std::size_t{0}) return 1.0 - std::cos(gamma) + std::max(a - p.back().x, 0.0) / a;
  return std::sin(p.back().theta) - std::cos(gamma);
}

/// Centre height u0 of the plate problem u'(a) = cot(gamma), 0 <= gamma < pi/2.
inline ShootResult shoot_contact_angle(double kappa, double a, double gamma, const IntegratorOptions& opts = {}) {
  detail::require_positive(kappa, "kappa");
  detail::require_positive(a, "half-width");
  if (!(gamma >= 0.0 && gamma < kPi / 2.0)) fail(ErrorCode::InvalidParams, "contact angle must lie in [0, pi/2)");
  const double top = 1.0 / (kappa * a);
  const double eps = 1e-12 * top;
  double lo = eps, hi = top - eps;
  auto f = [&](double u0) { return contact_angle_residual(u0, kappa, a, gamma, opts); };
  const double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0))
    fail(ErrorCode::NoRoot, "contact-angle residual has no sign change: f(" + std::to_string(lo) +
                                ")=" + std::to_string(flo) + ", f(" + std::to_string(hi) + ")=" + std::to_string(fhi));
  ShootResult r = detail::bisect_increasing(f, lo, hi, flo, fhi);
  // Near gamma = 0 the upper end may turn vertical just short of the wall;
  // the lower end always reaches it.
  if (r.u0 == r.hi && r.lo < r.hi && integrate_to_wall(r.hi, kappa, a, opts).stop_index() != std::size_t{0}) {
    r.u0 = r.lo;
    r.residual = std::abs(f(r.lo));
  }
  return r;
}

/// Plate problem for any gamma in [0, pi]. For gamma > pi/2 the liquid falls
/// below the reference plane: the solution is the mirror image (z -> -z) of
/// the one for pi - gamma, so u0 changes sign and nothing else changes.
inline ShootResult shoot_contact_angle_any(double kappa, double a, double gamma, const IntegratorOptions& opts = {}) {
  if (!(gamma >= 0.0 && gamma <= kPi)) fail(ErrorCode::InvalidParams, "contact angle must lie in [0, pi]");
  if (gamma == kPi / 2.0) {
    detail::require_positive(kappa, "kappa");
    detail::require_positive(a, "half-width");
    return {};
  }
  if (gamma < kPi / 2.0) return shoot_contact_angle(kappa, a, gamma, opts);
  ShootResult r = shoot_contact_angle(kappa, a, kPi - gamma, opts);
  r.u0 = -r.u0;
  std::swap(r.lo, r.hi);
  r.lo = -r.lo;
  r.hi = -r.hi;
  return r;
}

/// Profile from u0 (> 0, kappa > 0) stopped where the inclination reaches psi.
inline Profile integrate_to_angle(double u0, double kappa, double psi, const IntegratorOptions& opts = {}) {
  const Stop stop{[psi](const ProfileState& st) { return st.theta - psi; }, +1};
  IntegratorOptions o = opts;
  o.events = EventSet::none();
  Profile p = integrate_until(u0, kappa, detail::angle_arclength_bound(u0, kappa, psi), std::span<const Stop>(&stop, 1), o);
  if (!p.stop_index()) fail(ErrorCode::NoEvent, "inclination " + std::to_string(psi) + " not reached");
  return p;
}

/// Cross-sectional area per unit length 2(r u - sin(gamma)/kappa) at the
/// point of inclination gamma.
inline double volume_at_angle(double u0, double kappa, double gamma, const IntegratorOptions& opts = {}) {
  detail::require_positive(u0, "u0");
  detail::require_positive(kappa, "kappa");
  if (!(gamma > 0.0 && gamma <= kPi)) fail(ErrorCode::InvalidParams, "contact angle must lie in (0, pi]");
  const ProfileState st = integrate_to_angle(u0, kappa, gamma, opts).back();
  return 2.0 * (st.x * st.z - std::sin(gamma) / kappa);
}

/// The same area as a quadrature, 2(r u - integral of u dr), with the
/// integral taken along the arc as integral of z cos(theta) ds.
inline double volume_by_quadrature(const Profile& p) {
  const ProfileState end = p.back();
  const double area_under = integrate_along(p, 0.0, end.s, [](const ProfileState& st) { return st.z * std::cos(st.theta); });
  return 2.0 * (end.x * end.z - area_under);
}

inline ShootResult shoot_volume(double kappa, double gamma, double V, const IntegratorOptions& opts = {}) {
  detail::require_positive(kappa, "kappa");
  detail::require_positive(V, "volume");
  if (!(gamma > 0.0 && gamma <= kPi)) fail(ErrorCode::InvalidParams, "contact angle must lie in (0, pi]");
  // Volume decreases strictly in u0, so g(u0) = V - volume(u0) increases.
  auto g = [&](double u0) { return (V - volume_at_angle(u0, kappa, gamma, opts)) / V; };
  const double L = capillary_length(kappa);
  double lo = 0.5 * L, hi = 2.0 * L;
  double glo = g(lo), ghi = g(hi);
  for (int n = 0; glo > 0.0; ++n) {
    if (n >= 1000) fail(ErrorCode::BracketOverflow, "volume too large for the bracket");
    hi = lo;
    ghi = glo;
    lo *= 0.5;
    glo = g(lo);
  }
  for (int n = 0; ghi < 0.0; ++n) {
    if (n >= 1000) fail(ErrorCode::BracketOverflow, "volume too small for the bracket");
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    ghi = g(hi);
  }
  if (glo == 0.0) return {lo, 0.0, 0, lo, lo};
  if (ghi == 0.0) return {hi, 0.0, 0, hi, hi};
  return detail::bisect_increasing(g, lo, hi, glo, ghi);
}

struct ChannelGeometry {
  double r_gamma = 0.0;
  double u_gamma = 0.0;
  double R_vertical = 0.0;
  double u_vertical = 0.0;
  double r_o = 0.0;
  double volume = 0.0;
  /// |u(gamma) - sqrt(u0^2 + (2/kappa)(1 - cos gamma))|
  double height_residual = 0.0;
};

inline constexpr std::array<double, 3> kRichardsonDeltas{1e-3, 1e-4, 1e-5};

/// r(pi - delta) for the three deltas, extrapolated to delta -> 0. The leading
/// error terms are linear and quadratic in delta.
inline double richardson_limit(const std::array<double, 3>& r) {
  const double a = (10.0 * r[1] - r[0]) / 9.0;
  const double b = (10.0 * r[2] - r[1]) / 9.0;
  return (100.0 * b - a) / 99.0;
}

inline ChannelGeometry channel_extent(double u0, double kappa, double gamma, const IntegratorOptions& opts = {}) {
  detail::require_positive(u0, "u0");
  detail::require_positive(kappa, "kappa");
  if (!(gamma > 0.0 && gamma <= kPi)) fail(ErrorCode::InvalidParams, "contact angle must lie in (0, pi]");
  IntegratorOptions o = opts;
  o.events = EventSet::none();
  o.angle_targets = {gamma, kPi / 2.0};
  for (double d : kRichardsonDeltas) o.angle_targets.push_back(kPi - d);
  // Run a little past pi so that every target is crossed, not merely touched.
  const Profile p = integrate_to_angle(u0, kappa, kPi + 0.05, o);
  auto hit = [&](double psi) {
    const auto e = p.first_at_level(EventKind::AngleHit, psi);
    if (!e) fail(ErrorCode::NoEvent, "inclination " + std::to_string(psi) + " not reached");
    return e->state;
  };
  ChannelGeometry g;
  const ProfileState sg = hit(gamma), sv = hit(kPi / 2.0);
  g.r_gamma = sg.x;
  g.u_gamma = sg.z;
  g.R_vertical = sv.x;
  g.u_vertical = sv.z;
  std::array<double, 3> r{};
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = hit(kPi - kRichardsonDeltas[i]).x;
  g.r_o = richardson_limit(r);
  g.volume = 2.0 * (sg.x * sg.z - std::sin(gamma) / kappa);
  g.height_residual = std::abs(sg.z - std::sqrt(height_squared_from_theta(gamma, u0, kappa)));
  return g;
}

struct InclusionReport {
  /// min over the common r-range of u(r; u0 + delta) - delta - u(r; u0); >= 0 up to rounding.
  double min_gap = 0.0;
  double r_at_min = 0.0;
  /// u(gamma; u0 + delta) - u(gamma; u0) - delta, which is negative.
  double gamma_gap = 0.0;
  double common_r = 0.0;
};

/// Compares the channel starting at u0 + delta, lowered by delta, with the one
/// starting at u0, both cut at inclination gamma in (0, pi/2].
inline InclusionReport inclusion_check(double u0, double kappa, double gamma, double delta,
                                       const IntegratorOptions& opts = {}, int samples = 1000) {
  detail::require_positive(u0, "u0");
  detail::require_positive(kappa, "kappa");
  detail::require_positive(delta, "delta");
  if (!(gamma > 0.0 && gamma <= kPi / 2.0)) fail(ErrorCode::InvalidParams, "contact angle must lie in (0, pi/2]");
  const Profile p = integrate_to_angle(u0, kappa, gamma, opts);
  const Profile q = integrate_to_angle(u0 + delta, kappa, gamma, opts);
  const GraphView gp(p, p.back().s), gq(q, q.back().s);
  InclusionReport out;
  out.common_r = std::min(p.back().x, q.back().x);
  out.gamma_gap = q.back().z - p.back().z - delta;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double r = out.common_r * i / samples;
    const double gap = gq.u(r) - delta - gp.u(r);
    if (gap < out.min_gap) {
      out.min_gap = gap;
      out.r_at_min = r;
    }
  }
  return out;
}

/// Abscissa of the first zero of a pendent graph profile (kappa < 0).
inline double pendent_first_zero(double u0, double kappa, const IntegratorOptions& opts = {}) {
  require_kappa(kappa);
  if (!(kappa < 0.0 && u0 < 0.0)) fail(ErrorCode::WrongRegime, "first zero needs kappa < 0 and u0 < 0");
  if (classify(u0, kappa).tag != RegimeTag::PendentGraph)
    fail(ErrorCode::WrongRegime, "u0 outside the pendent graph range");
  return integrate_to_first_zero(u0, kappa, detail::quiet_options(opts)).back().x;
}

}  // namespace capchan
