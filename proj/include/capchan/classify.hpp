#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "capchan/error.hpp"
#include "capchan/params.hpp"
#include "capchan/profile.hpp"

namespace capchan {

enum class RegimeTag {
  FlatLine,
  SessilePeriodic,
  PendentPeriodicNegative,
  PendentAsymptotic,
  PendentOscillatingVertical,
  PendentGraph,
};

enum class BoundaryFlag { OnGraphBoundary, OnAsymptoticBoundary };

inline std::string_view to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::FlatLine: return "FlatLine";
    case RegimeTag::SessilePeriodic: return "SessilePeriodic";
    case RegimeTag::PendentPeriodicNegative: return "PendentPeriodicNegative";
    case RegimeTag::PendentAsymptotic: return "PendentAsymptotic";
    case RegimeTag::PendentOscillatingVertical: return "PendentOscillatingVertical";
    case RegimeTag::PendentGraph: return "PendentGraph";
  }
  return "Unknown";
}

inline std::string_view to_string(BoundaryFlag flag) {
  return flag == BoundaryFlag::OnGraphBoundary ? "OnGraphBoundary" : "OnAsymptoticBoundary";
}

struct Regime {
  RegimeTag tag = RegimeTag::FlatLine;
  std::vector<BoundaryFlag> boundary_flags;

  [[nodiscard]] bool has(BoundaryFlag f) const {
    return std::find(boundary_flags.begin(), boundary_flags.end(), f) != boundary_flags.end();
  }
};

/// The two pendent thresholds: below `winding` the profile winds, between the
/// two it oscillates with vertical points, above `graph` it is a graph.
struct PendentThresholds {
  double winding;  // -2/sqrt(-kappa)
  double graph;    // -sqrt(2/(-kappa))
};

inline PendentThresholds pendent_thresholds(double kappa) {
  require_kappa(kappa);
  if (kappa > 0.0) fail(ErrorCode::WrongRegime, "pendent thresholds need kappa < 0");
  return {-2.0 / std::sqrt(-kappa), -std::sqrt(2.0 / -kappa)};
}

inline constexpr double kThresholdRelTol = 1e-12;

inline Regime classify(double z0, double kappa) {
  require_kappa(kappa);
  if (!std::isfinite(z0)) fail(ErrorCode::InvalidParams, "z0 must be finite");
  if (z0 == 0.0) return {RegimeTag::FlatLine, {}};
  if (kappa > 0.0) return {RegimeTag::SessilePeriodic, {}};

  const double z = -std::abs(z0);  // z -> -z maps solutions to solutions
  const auto th = pendent_thresholds(kappa);
  const auto near = [](double v, double t) { return std::abs(v - t) <= kThresholdRelTol * std::abs(t); };
  if (near(z, th.winding)) return {RegimeTag::PendentAsymptotic, {BoundaryFlag::OnAsymptoticBoundary}};
  if (near(z, th.graph)) return {RegimeTag::PendentGraph, {BoundaryFlag::OnGraphBoundary}};
  if (z < th.winding) return {RegimeTag::PendentPeriodicNegative, {}};
  if (z < th.graph) return {RegimeTag::PendentOscillatingVertical, {}};
  return {RegimeTag::PendentGraph, {}};
}

namespace detail {

inline bool winds(RegimeTag tag) {
  return tag == RegimeTag::SessilePeriodic || tag == RegimeTag::PendentPeriodicNegative;
}

inline bool oscillates(RegimeTag tag) {
  return tag == RegimeTag::PendentOscillatingVertical || tag == RegimeTag::PendentGraph;
}

/// Upper bound on the arclength of one full turn of theta: |theta'| = |kappa z|
/// and |z| never drops below `z_min` on a winding profile.
inline double winding_arclength_bound(double z0, double kappa) {
  const double z_min = kappa > 0.0 ? std::abs(z0) : std::sqrt(std::max(z0 * z0 + 4.0 / kappa, 0.0));
  return 2.0 * kPi / (std::abs(kappa) * z_min) * 1.05 + capillary_length(kappa);
}

inline IntegratorOptions quiet_options(const IntegratorOptions& base) {
  IntegratorOptions o = base;
  o.events = EventSet::none();
  o.angle_targets.clear();
  o.sample_spacing = 0.0;
  return o;
}

}  // namespace detail

/// Integrates until the first zero of z (the first time the directrix meets
/// the reference line). The run stops there; NoEvent when no zero occurs
/// within 10^4 capillary lengths.
inline Profile integrate_to_first_zero(double z0, double kappa, const IntegratorOptions& opts = {}) {
  const Stop stop{[](const ProfileState& st) { return st.z; }, 0};
  Profile p = integrate_until(z0, kappa, 1e4 * capillary_length(kappa), std::span<const Stop>(&stop, 1), opts);
  if (!p.stop_index()) fail(ErrorCode::NoEvent, "no zero of z found");
  return p;
}

struct PeriodData {
  double T = 0.0;
  double translation = 0.0;
  int winding = 0;
  /// max over one period of |alpha(s+T) - alpha(s) - (x(T), 0)|, theta included.
  double residual = 0.0;
  /// First zero of z for the oscillating regimes (T = 4 s0).
  std::optional<double> s0;
};

inline PeriodData period(double z0, double kappa, const IntegratorOptions& opts = {}) {
  const Regime regime = classify(z0, kappa);
  PeriodData out;
  const auto quiet = detail::quiet_options(opts);
  if (detail::winds(regime.tag)) {
    // theta' = kappa z keeps one sign, so theta winds monotonically.
    const int dir = kappa * z0 > 0.0 ? 1 : -1;
    const double target = dir * 2.0 * kPi;
    const Stop stop{[target](const ProfileState& st) { return st.theta - target; }, 0};
    const Profile turn =
        integrate_until(z0, kappa, detail::winding_arclength_bound(z0, kappa), std::span<const Stop>(&stop, 1), quiet);
    if (!turn.stop_index()) fail(ErrorCode::NoEvent, "theta did not complete a turn");
    out.T = turn.back().s;
    out.winding = dir;
  } else if (detail::oscillates(regime.tag)) {
    const Profile quarter = integrate_to_first_zero(z0, kappa, quiet);
    out.s0 = quarter.back().s;
    out.T = 4.0 * *out.s0;
  } else {
    fail(ErrorCode::NotPeriodic, std::string(to_string(regime.tag)) + " profile is not periodic");
  }

  const Profile two = integrate(z0, kappa, 2.0 * out.T, quiet);
  const ProfileState end = two.at(out.T);
  out.translation = end.x;
  constexpr int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double s = out.T * i / n;
    const ProfileState p = two.at(s), q = two.at(s + out.T);
    out.residual = std::max({out.residual, std::abs(q.x - p.x - out.translation), std::abs(q.z - p.z),
                             std::abs(q.theta - p.theta - 2.0 * kPi * out.winding)});
  }
  return out;
}

struct VerticalPointRecord {
  double s = 0.0;
  double z = 0.0;
  double x = 0.0;
  /// Quarter of the period [k s0, (k+1) s0] containing the point, k = 0..3.
  int side = 0;
};

/// Vertical points over one period [0, 4 s0). On the graph boundary the
/// vertical points degenerate into the zeros of z, which are returned instead.
inline std::vector<VerticalPointRecord> vertical_points(double z0, double kappa, const IntegratorOptions& opts = {}) {
  const Regime regime = classify(z0, kappa);
  const bool boundary = regime.has(BoundaryFlag::OnGraphBoundary);
  if (regime.tag != RegimeTag::PendentOscillatingVertical && !boundary)
    fail(ErrorCode::WrongRegime, std::string(to_string(regime.tag)) + " has no periodic vertical points");

  const double s0 = integrate_to_first_zero(z0, kappa, detail::quiet_options(opts)).back().s;
  IntegratorOptions o = opts;
  o.events = EventSet::none();
  o.events.vertical_point = !boundary;
  o.events.z_zero = boundary;
  const Profile p = integrate(z0, kappa, 4.0 * s0, o);
  std::vector<VerticalPointRecord> out;
  for (const auto& e : p.events()) {
    if (e.s >= 4.0 * s0 * (1.0 - 1e-12)) continue;
    const int side = std::clamp(static_cast<int>(e.s / s0), 0, 3);
    out.push_back({e.s, e.state.z, e.state.x, side});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Self-intersection scan

struct Crossing {
  double s_a = 0.0;
  double s_b = 0.0;
  double x = 0.0;
  double z = 0.0;
  double angle = 0.0;  // acute angle between the two branches, radians
};

struct Morphology {
  std::vector<Crossing> crossings;
  std::size_t tangential = 0;
  /// x(4 s0): sign gives the drift direction, zero means a closed curve.
  double drift = 0.0;
  bool closed = false;
  double periods_scanned = 0.0;

  [[nodiscard]] bool has_double_points() const { return !crossings.empty(); }
  [[nodiscard]] int drift_sign() const { return closed ? 0 : (drift > 0.0 ? 1 : -1); }
};

inline constexpr double kTangentialAngle = 1e-4;

/// Finds the double points of a polyline by a uniform-grid sweep. Adjacent
/// segments are never compared; each crossing is reported once.
inline std::vector<Crossing> polyline_crossings(const std::vector<ProfileState>& pts) {
  std::vector<Crossing> out;
  if (pts.size() < 4) return out;
  const std::size_t nseg = pts.size() - 1;
  double cell = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) cell = std::max(cell, std::hypot(pts[i + 1].x - pts[i].x, pts[i + 1].z - pts[i].z));
  if (!(cell > 0.0)) return out;
  cell *= 2.0;

  const auto key = [](std::int64_t ix, std::int64_t iz) { return (ix << 32) ^ (iz & 0xffffffffLL); };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < nseg; ++i) {
    const auto x0 = static_cast<std::int64_t>(std::floor(std::min(pts[i].x, pts[i + 1].x) / cell));
    const auto x1 = static_cast<std::int64_t>(std::floor(std::max(pts[i].x, pts[i + 1].x) / cell));
    const auto z0 = static_cast<std::int64_t>(std::floor(std::min(pts[i].z, pts[i + 1].z) / cell));
    const auto z1 = static_cast<std::int64_t>(std::floor(std::max(pts[i].z, pts[i + 1].z) / cell));
    for (auto ix = x0; ix <= x1; ++ix)
      for (auto iz = z0; iz <= z1; ++iz) grid[key(ix, iz)].push_back(i);
  }

  std::vector<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [k, segs] : grid) {
    for (std::size_t u = 0; u < segs.size(); ++u) {
      for (std::size_t v = u + 1; v < segs.size(); ++v) {
        const std::size_t i = std::min(segs[u], segs[v]), j = std::max(segs[u], segs[v]);
        if (j - i < 2) continue;
        const auto &p = pts[i], &p2 = pts[i + 1], &q = pts[j], &q2 = pts[j + 1];
        const double rx = p2.x - p.x, rz = p2.z - p.z, sx = q2.x - q.x, sz = q2.z - q.z;
        const double den = rx * sz - rz * sx;
        if (den == 0.0) continue;
        const double qpx = q.x - p.x, qpz = q.z - p.z;
        const double t = (qpx * sz - qpz * sx) / den;
        const double w = (qpx * rz - qpz * rx) / den;
        // Half-open parameter ranges so a crossing through a vertex counts once.
        if (t < 0.0 || t >= 1.0 || w < 0.0 || w >= 1.0) continue;
        seen.emplace_back(i, j);
        const double cosang = std::abs(rx * sx + rz * sz) / (std::hypot(rx, rz) * std::hypot(sx, sz));
        out.push_back({p.s + t * (p2.s - p.s), q.s + w * (q2.s - q.s), p.x + t * rx, p.z + t * rz,
                       std::acos(std::min(1.0, cosang))});
      }
    }
  }
  // Segments sharing several cells produce duplicates.
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return seen[l] < seen[r]; });
  std::vector<Crossing> unique;
  for (std::size_t k = 0; k < order.size(); ++k)
    if (k == 0 || seen[order[k]] != seen[order[k - 1]]) unique.push_back(out[order[k]]);
  std::sort(unique.begin(), unique.end(), [](const Crossing& l, const Crossing& r) {
    return l.s_a != r.s_a ? l.s_a < r.s_a : l.s_b < r.s_b;
  });
  return unique;
}

/// Double points and drift of an oscillating pendent directrix, scanned over
/// s in [-periods T, periods T] (the s < 0 half is the mirror image about the
/// vertical through the starting point).
inline Morphology morphology(double z0, double kappa, double periods = 2.0, int points_per_period = 20000,
                             const IntegratorOptions& opts = {}) {
  const Regime regime = classify(z0, kappa);
  if (!detail::oscillates(regime.tag)) fail(ErrorCode::WrongRegime, "morphology scan needs an oscillating pendent profile");
  const PeriodData pd = period(z0, kappa, opts);
  IntegratorOptions o = detail::quiet_options(opts);
  o.sample_spacing = pd.T / points_per_period;
  const Profile p = integrate(z0, kappa, periods * pd.T, o);

  std::vector<ProfileState> poly;
  const auto& smp = p.samples();
  poly.reserve(2 * smp.size());
  for (auto it = smp.rbegin(); it != smp.rend(); ++it)
    if (it->s > 0.0) poly.push_back({-it->s, -it->x, it->z, -it->theta});
  poly.insert(poly.end(), smp.begin(), smp.end());

  Morphology m;
  m.crossings = polyline_crossings(poly);
  for (const auto& c : m.crossings)
    if (c.angle < kTangentialAngle) ++m.tangential;
  m.drift = pd.translation;
  m.closed = std::abs(pd.translation) <= 1e-8 * capillary_length(kappa);
  m.periods_scanned = 2.0 * periods;
  return m;
}

// ---------------------------------------------------------------------------
// Critical heights

struct CriticalHeights {
  double z_tangent = 0.0;
  double z_closed = 0.0;
  double bracket_width = 0.0;
  std::size_t iterations = 0;
  bool tangent_above_closed = false;
  bool tangent_monotone = false;
  bool closed_monotone = false;
  /// +1 when the bisected function increases with z0 on the sample grid.
  int tangent_direction = 0;
  int closed_direction = 0;
};

/// x at the first zero of z; its root is the closed-curve height.
inline double closure_offset(double z0, double kappa, const IntegratorOptions& opts = {}) {
  return integrate_to_first_zero(z0, kappa, detail::quiet_options(opts)).back().x;
}

/// x at the second vertical point (theta falling back through pi/2 after the
/// first zero). Its root is where the arc meets its own mirror image about
/// the starting vertical with a common vertical tangent.
inline double tangency_offset(double z0, double kappa, const IntegratorOptions& opts = {}) {
  const Stop stop{[](const ProfileState& st) { return st.theta - kPi / 2.0; }, -1};
  const Profile p = integrate_until(z0, kappa, 1e4 * capillary_length(kappa), std::span<const Stop>(&stop, 1),
                                    detail::quiet_options(opts));
  if (!p.stop_index()) fail(ErrorCode::NoEvent, "no second vertical point");
  return p.back().x;
}

namespace detail {

struct BisectOutcome {
  double root;
  double width;
  std::size_t iterations;
};

template <class F>
BisectOutcome bisect_height(F&& f, double lo, double hi, double width, const char* name) {
  double flo = f(lo), fhi = f(hi);
  if ((flo < 0.0) == (fhi < 0.0) && flo != 0.0 && fhi != 0.0)
    fail(ErrorCode::NoSignChange, std::string(name) + ": f(" + std::to_string(lo) + ")=" + std::to_string(flo) +
                                      ", f(" + std::to_string(hi) + ")=" + std::to_string(fhi));
  std::size_t it = 0;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    ++it;
    if (fm == 0.0) return {mid, 0.0, it};
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), hi - lo, it};
}

/// +1 / -1 when strictly monotone on the samples, 0 otherwise.
inline int monotone_direction(const std::vector<double>& v) {
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    inc = inc && v[i] > v[i - 1];
    dec = dec && v[i] < v[i - 1];
  }
  return inc ? 1 : (dec ? -1 : 0);
}

}  // namespace detail

inline CriticalHeights critical_heights(double kappa, const IntegratorOptions& opts = {}, int grid_points = 21) {
  require_kappa(kappa);
  if (kappa > 0.0) fail(ErrorCode::WrongRegime, "critical heights need kappa < 0");
  const auto th = pendent_thresholds(kappa);
  // Both functions degenerate at the interval ends, so stay 1e-6 inside.
  const double lo = th.winding * (1.0 - 1e-6);
  const double hi = th.graph * (1.0 + 1e-6);
  const double width = 1e-10 * (2.0 / std::sqrt(-kappa));

  auto closed = [&](double z) { return closure_offset(z, kappa, opts); };
  auto tangent = [&](double z) { return tangency_offset(z, kappa, opts); };

  CriticalHeights out;
  std::vector<double> gc, gt;
  for (int i = 0; i < grid_points; ++i) {
    const double z = lo + (hi - lo) * i / (grid_points - 1);
    gc.push_back(closed(z));
    gt.push_back(tangent(z));
  }
  out.closed_direction = detail::monotone_direction(gc);
  out.tangent_direction = detail::monotone_direction(gt);
  out.closed_monotone = out.closed_direction != 0;
  out.tangent_monotone = out.tangent_direction != 0;

  const auto c = detail::bisect_height(closed, lo, hi, width, "closure");
  const auto t = detail::bisect_height(tangent, lo, hi, width, "tangency");
  out.z_closed = c.root;
  out.z_tangent = t.root;
  out.bracket_width = std::max(c.width, t.width);
  out.iterations = c.iterations + t.iterations;
  out.tangent_above_closed = out.z_tangent > out.z_closed;
  return out;
}

}  // namespace capchan
