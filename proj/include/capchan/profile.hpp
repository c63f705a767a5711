#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capchan/dop853.hpp"
#include "capchan/error.hpp"
#include "capchan/params.hpp"

namespace capchan {

/// One point of the directrix in arclength parametrization. `theta` is the
/// tangent inclination and is never wrapped: in the winding regimes it grows
/// without bound and its winding count is part of the classification.
struct ProfileState {
  double s = 0.0;
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;
};

enum class EventKind { ThetaCrossing, ZZero, VerticalPoint, HeightExtremum, AngleHit };

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ThetaCrossing: return "ThetaCrossing";
    case EventKind::ZZero: return "ZZero";
    case EventKind::VerticalPoint: return "VerticalPoint";
    case EventKind::HeightExtremum: return "HeightExtremum";
    case EventKind::AngleHit: return "AngleHit";
  }
  return "Unknown";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (auto k : {EventKind::ThetaCrossing, EventKind::ZZero, EventKind::VerticalPoint, EventKind::HeightExtremum,
                 EventKind::AngleHit})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

/// A located feature of the trajectory. `level` is the crossed inclination for
/// ThetaCrossing / VerticalPoint / HeightExtremum / AngleHit, and 0 for ZZero.
struct Event {
  EventKind kind = EventKind::ZZero;
  double level = 0.0;
  double s = 0.0;
  ProfileState state;
};

struct EventSet {
  bool theta_crossing = true;
  bool z_zero = true;
  bool vertical_point = true;
  bool height_extremum = true;

  static EventSet all() { return {}; }
  static EventSet none() { return {false, false, false, false}; }
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Events are polished until the event function is below this value.
  double event_tol = 1e-12;
  std::size_t max_steps = 5'000'000;
  EventSet events = EventSet::all();
  std::vector<double> angle_targets;
  /// 0 keeps one sample per accepted step; otherwise samples are spaced evenly.
  double sample_spacing = 0.0;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  double max_error_ratio = 0.0;
};

/// Terminal condition: integration stops at the first root of `g` along the
/// trajectory. `direction` restricts to rising (+1) or falling (-1) crossings.
struct Stop {
  std::function<double(const ProfileState&)> g;
  int direction = 0;
};

/// Integrated directrix: samples, located events and the dense output that
/// lets callers evaluate the trajectory anywhere in [0, s_end()].
class Profile {
 public:
  using Segment = ode::DenseSegment<3>;

  Profile(double kappa, double z0) : kappa_(kappa), z0_(z0) {}

  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double z0() const { return z0_; }
  [[nodiscard]] FluidParams params() const { return FluidParams{kappa_, std::nullopt, std::nullopt}; }
  [[nodiscard]] const std::vector<ProfileState>& samples() const { return samples_; }
  [[nodiscard]] const std::vector<Event>& events() const { return events_; }
  [[nodiscard]] const IntegratorStats& stats() const { return stats_; }
  [[nodiscard]] std::span<const Segment> segments() const { return segments_; }
  [[nodiscard]] double s_end() const { return samples_.empty() ? 0.0 : samples_.back().s; }
  /// Index of the Stop that terminated the integration, if any.
  [[nodiscard]] std::optional<std::size_t> stop_index() const { return stop_index_; }
  [[nodiscard]] bool is_flat() const { return z0_ == 0.0; }

  [[nodiscard]] ProfileState at(double s) const {
    if (segments_.empty() || s < 0.0 || s > s_end() * (1.0 + 1e-15) + 1e-300)
      fail(ErrorCode::OutOfDomain, "arclength outside integrated range");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                               [](double v, const Segment& seg) { return v < seg.s0; });
    const Segment& seg = it == segments_.begin() ? segments_.front() : *std::prev(it);
    const auto y = seg.eval(s);
    return {s, y[0], y[1], y[2]};
  }

  [[nodiscard]] std::vector<Event> events_of(EventKind kind) const {
    std::vector<Event> out;
    for (const auto& e : events_)
      if (e.kind == kind) out.push_back(e);
    return out;
  }

  [[nodiscard]] std::optional<Event> first(EventKind kind) const {
    for (const auto& e : events_)
      if (e.kind == kind) return e;
    return std::nullopt;
  }

  [[nodiscard]] std::optional<Event> first_at_level(EventKind kind, double level, double tol = 1e-12) const {
    for (const auto& e : events_)
      if (e.kind == kind && std::abs(e.level - level) <= tol * std::max(1.0, std::abs(level))) return e;
    return std::nullopt;
  }

  /// State where the run stopped (terminal Stop) or the last sample otherwise.
  [[nodiscard]] const ProfileState& back() const { return samples_.back(); }

 private:
  friend class ProfileBuilder;

  double kappa_;
  double z0_;
  std::vector<ProfileState> samples_;
  std::vector<Event> events_;
  std::vector<Segment> segments_;
  IntegratorStats stats_;
  std::optional<std::size_t> stop_index_;
};

namespace detail {

inline ProfileState seg_state(const Profile::Segment& seg, double s) {
  const auto y = seg.eval(s);
  return {s, y[0], y[1], y[2]};
}

/// Bisection on the dense output until |f| <= tol or the bracket is at
/// machine resolution. Requires f(lo) and f(hi) of opposite sign (or f(hi)==0).
template <class F>
double polish_root(const Profile::Segment& seg, F&& f, double lo, double hi, double tol) {
  double flo = f(seg_state(seg, lo));
  double fhi = f(seg_state(seg, hi));
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(seg_state(seg, mid));
    if (std::abs(fm) <= tol) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

inline bool crosses(double a, double b) { return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || (a != 0.0 && b == 0.0); }

}  // namespace detail

/// Accumulates dense segments into a Profile, locating events and stops.
class ProfileBuilder {
 public:
  ProfileBuilder(double kappa, double z0, const IntegratorOptions& opts, std::span<const Stop> stops)
      : profile_(kappa, z0), opts_(opts), stops_(stops) {
    profile_.samples_.push_back({0.0, 0.0, z0, 0.0});
  }

  /// Returns false once a terminal stop fired.
  bool add(const Profile::Segment& seg) {
    const std::vector<Knot> knots = split(seg);

    std::optional<std::size_t> fired;
    ProfileState end = knots.back().st;
    for (std::size_t k = 0; k + 1 < knots.size() && !fired; ++k) {
      const ProfileState& pa = knots[k].st;
      const ProfileState& pb = knots[k + 1].st;
      if (k > 0) emit(knots[k]);
      double s_cut = pb.s;
      for (std::size_t i = 0; i < stops_.size(); ++i) {
        const auto& stop = stops_[i];
        const double ga = stop.g(pa), gb = stop.g(pb);
        if (!detail::crosses(ga, gb)) continue;
        if (stop.direction > 0 && !(gb > ga)) continue;
        if (stop.direction < 0 && !(gb < ga)) continue;
        const double root = detail::polish_root(seg, stop.g, pa.s, pb.s, opts_.event_tol);
        if (!fired || root < s_cut) {
          s_cut = root;
          fired = i;
        }
      }
      end = fired ? detail::seg_state(seg, s_cut) : pb;
      locate_angle_hits(seg, pa, end);
    }
    if (!fired) emit(knots.back());

    // A stop only shortens the valid range; the stored polynomial is unchanged.
    profile_.segments_.push_back(seg);
    if (opts_.sample_spacing > 0.0) {
      while (next_sample_ < end.s) {
        if (next_sample_ > profile_.samples_.back().s) profile_.samples_.push_back(detail::seg_state(seg, next_sample_));
        next_sample_ += opts_.sample_spacing;
      }
    }
    if (end.s > profile_.samples_.back().s) profile_.samples_.push_back(end);
    if (fired) {
      profile_.stop_index_ = fired;
      return false;
    }
    return true;
  }

  void set_stats(const IntegratorStats& stats) { profile_.stats_ = stats; }

  Profile finish() && {
    std::stable_sort(profile_.events_.begin(), profile_.events_.end(),
                     [](const Event& l, const Event& r) { return l.s < r.s; });
    return std::move(profile_);
  }

 private:
  struct Knot {
    ProfileState st;
    bool z_zero = false;
    std::optional<long long> quarter;  // theta = quarter * pi/2 here
  };

  /// Cuts a step at the zero of z and at every crossing of a multiple of
  /// pi/2. theta' = kappa z makes theta monotone between zeros of z, and
  /// x' = cos(theta), z' = sin(theta) make x and z monotone between the
  /// theta crossings, so on each piece endpoint signs cannot miss a root of
  /// x, z or theta (for instance theta peaking just past pi/2 inside a step).
  std::vector<Knot> split(const Profile::Segment& seg) const {
    const double tol = opts_.event_tol;
    const ProfileState a = detail::seg_state(seg, seg.s0);
    const ProfileState b = detail::seg_state(seg, seg.s1());
    std::vector<Knot> coarse{{a, false, std::nullopt}};
    if (detail::crosses(a.z, b.z)) {
      auto g = [](const ProfileState& st) { return st.z; };
      const double r = b.z == 0.0 ? seg.s1() : detail::polish_root(seg, g, seg.s0, seg.s1(), tol);
      coarse.push_back({detail::seg_state(seg, r), true, std::nullopt});
    }
    if (coarse.back().st.s < b.s) coarse.push_back({b, false, std::nullopt});

    std::vector<Knot> out{coarse.front()};
    constexpr double quarter = kPi / 2.0;
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
      const ProfileState& pa = coarse[k].st;
      const ProfileState& pb = coarse[k + 1].st;
      const bool rising = pb.theta >= pa.theta;
      const auto k_lo = static_cast<long long>(std::ceil(std::min(pa.theta, pb.theta) / quarter));
      const auto k_hi = static_cast<long long>(std::floor(std::max(pa.theta, pb.theta) / quarter));
      std::vector<Knot> levels;
      for (long long q = k_lo; q <= k_hi; ++q) {
        const double level = static_cast<double>(q) * quarter;
        auto g = [level](const ProfileState& st) { return st.theta - level; };
        if (!detail::crosses(g(pa), g(pb))) continue;
        levels.push_back({detail::seg_state(seg, detail::polish_root(seg, g, pa.s, pb.s, tol)), false, q});
      }
      if (!rising) std::reverse(levels.begin(), levels.end());
      for (auto& l : levels) {
        // A crossing that lands on the closing knot is merged into it.
        if (l.st.s >= pb.s) {
          coarse[k + 1].quarter = l.quarter;
          continue;
        }
        out.push_back(l);
      }
      out.push_back(coarse[k + 1]);
    }
    return out;
  }

  void push_event(EventKind kind, double level, const ProfileState& st) { profile_.events_.push_back({kind, level, st.s, st}); }

  void emit(const Knot& k) {
    const auto& ev = opts_.events;
    if (k.z_zero && ev.z_zero) push_event(EventKind::ZZero, 0.0, k.st);
    if (!k.quarter) return;
    const double level = static_cast<double>(*k.quarter) * (kPi / 2.0);
    if (ev.theta_crossing) push_event(EventKind::ThetaCrossing, level, k.st);
    const bool odd = (*k.quarter % 2) != 0;
    if (odd && ev.vertical_point) push_event(EventKind::VerticalPoint, level, k.st);
    if (!odd && ev.height_extremum) push_event(EventKind::HeightExtremum, level, k.st);
  }

  void locate_angle_hits(const Profile::Segment& seg, const ProfileState& a, const ProfileState& b) {
    if (b.s <= a.s) return;
    for (double target : opts_.angle_targets) {
      auto g = [target](const ProfileState& st) { return st.theta - target; };
      if (detail::crosses(g(a), g(b)))
        push_event(EventKind::AngleHit, target,
                   detail::seg_state(seg, detail::polish_root(seg, g, a.s, b.s, opts_.event_tol)));
    }
  }

  Profile profile_;
  IntegratorOptions opts_;
  std::span<const Stop> stops_;
  double next_sample_ = 0.0;
};

/// Right-hand side of the directrix system: x' = cos(theta), z' = sin(theta),
/// theta' = kappa z.
struct DirectrixRhs {
  double kappa;
  void operator()(double, const ode::Vec<3>& y, ode::Vec<3>& dy) const {
    dy[0] = std::cos(y[2]);
    dy[1] = std::sin(y[2]);
    dy[2] = kappa * y[1];
  }
};

/// Integrates the directrix from (x, z, theta) = (0, z0, 0) up to arclength
/// `s_max`, or until the first Stop fires.
inline Profile integrate_until(double z0, double kappa, double s_max, std::span<const Stop> stops,
                               const IntegratorOptions& opts = {}) {
  require_kappa(kappa);
  if (!(s_max > 0.0) || !std::isfinite(s_max)) fail(ErrorCode::InvalidParams, "s_max must be positive and finite");
  if (!std::isfinite(z0)) fail(ErrorCode::InvalidParams, "z0 must be finite");
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) fail(ErrorCode::InvalidParams, "tolerances must be positive");

  ProfileBuilder builder(kappa, z0, opts, stops);
  if (z0 == 0.0) {
    // Exact straight line x = s.
    const double h = std::min(s_max, 1.0);
    for (double s0 = 0.0; s0 < s_max;) {
      Profile::Segment seg;
      seg.s0 = s0;
      seg.h = std::min(h, s_max - s0);
      seg.rc[0] = {s0, 0.0, 0.0};
      seg.rc[1] = {seg.h, 0.0, 0.0};
      const double next = s0 + seg.h;
      if (!builder.add(seg)) break;
      s0 = next >= s_max * (1.0 - 1e-15) ? s_max : next;
    }
    builder.set_stats({0, 0, 0, opts.rel_tol, opts.abs_tol, 0.0});
    return std::move(builder).finish();
  }

  // Local errors add up over the hundreds of steps a winding profile takes, so
  // the controller works against a tighter local target to keep the requested
  // tolerance as a bound on the accumulated (global) error.
  constexpr double local_factor = 1.0 / 32.0;
  ode::StepControl control{opts.rel_tol * local_factor, opts.abs_tol * local_factor, opts.max_steps};
  const ode::Vec<3> cap{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), kPi};
  ode::Dop853<3, DirectrixRhs> stepper(DirectrixRhs{kappa}, 0.0, {0.0, z0, 0.0}, control, cap);
  while (stepper.t() < s_max) {
    const auto seg = stepper.step(s_max);
    if (!builder.add(seg)) break;
  }
  const auto& st = stepper.stats();
  builder.set_stats({st.accepted, st.rejected, st.rhs_evals, opts.rel_tol, opts.abs_tol, st.max_error_ratio});
  return std::move(builder).finish();
}

inline Profile integrate(double z0, double kappa, double s_max, const IntegratorOptions& opts = {}) {
  return integrate_until(z0, kappa, s_max, {}, opts);
}

/// Squared height at any trajectory point with inclination `theta`:
/// z0^2 + (2/kappa)(1 - cos theta). Negative values mean no such point exists.
inline double height_squared_from_theta(double theta, double z0, double kappa) {
  require_kappa(kappa);
  const double v = z0 * z0 + (2.0 / kappa) * (1.0 - std::cos(theta));
  if (v < 0.0) fail(ErrorCode::UnreachableAngle, "no trajectory point has inclination " + std::to_string(theta));
  return v;
}

/// |z^2 - z0^2 - (2/kappa)(1 - cos theta)| at one state.
inline double first_integral_residual(const ProfileState& st, double z0, double kappa) {
  return std::abs(st.z * st.z - z0 * z0 - (2.0 / kappa) * (1.0 - std::cos(st.theta)));
}

inline double max_first_integral_residual(const Profile& p) {
  double worst = 0.0;
  for (const auto& st : p.samples()) worst = std::max(worst, first_integral_residual(st, p.z0(), p.kappa()));
  for (const auto& e : p.events()) worst = std::max(worst, first_integral_residual(e.state, p.z0(), p.kappa()));
  return worst;
}

/// Integral of f(state) ds over [s_a, s_b] using 8-point Gauss-Legendre on
/// every dense segment; the integrand is smooth in s even where z(x) is not.
template <class F>
double integrate_along(const Profile& p, double s_a, double s_b, F&& f) {
  static constexpr std::array<double, 8> node{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                              -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                              0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> weight{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                0.2223810344533745, 0.1012285362903763};
  double total = 0.0;
  for (const auto& seg : p.segments()) {
    const double lo = std::max(seg.s0, s_a), hi = std::min(seg.s1(), s_b);
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < node.size(); ++i) acc += weight[i] * f(detail::seg_state(seg, mid + half * node[i]));
    total += half * acc;
  }
  return total;
}

/// Reads an arc of the profile on which x is strictly increasing as a graph
/// u(r), inverting x(s) on the dense output.
class GraphView {
 public:
  GraphView(const Profile& p, double s_limit) : p_(&p), s_limit_(std::min(s_limit, p.s_end())) {
    r_max_ = p.at(s_limit_).x;
  }

  [[nodiscard]] double r_max() const { return r_max_; }

  [[nodiscard]] ProfileState at_x(double r) const {
    if (r < 0.0 || r > r_max_ * (1.0 + 1e-14)) fail(ErrorCode::OutOfDomain, "abscissa outside the graph arc");
    const auto all = p_->segments();
    const auto last = std::upper_bound(all.begin(), all.end(), s_limit_,
                                       [](double v, const Profile::Segment& seg) { return v < seg.s0; });
    auto it = std::lower_bound(all.begin(), last, r, [&](const Profile::Segment& seg, double v) {
      return seg.component(std::min(seg.s1(), s_limit_), 0) < v;
    });
    if (it == last) --it;
    double lo = it->s0, hi = std::min(it->s1(), s_limit_);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (it->component(mid, 0) < r)
        lo = mid;
      else
        hi = mid;
    }
    const ProfileState a = detail::seg_state(*it, lo), b = detail::seg_state(*it, hi);
    return std::abs(a.x - r) <= std::abs(b.x - r) ? a : b;
  }

  [[nodiscard]] double u(double r) const { return at_x(r).z; }

 private:
  const Profile* p_;
  double s_limit_;
  double r_max_ = 0.0;
};

// ---------------------------------------------------------------------------
// Symmetry checks

enum class SymmetryKind { Reflection, Point };

struct SymmetryEntry {
  SymmetryKind kind = SymmetryKind::Reflection;
  double s_center = 0.0;
  double span = 0.0;
  double dx = 0.0;
  double dz = 0.0;
  double dtheta = 0.0;

  [[nodiscard]] double max() const { return std::max({dx, dz, dtheta}); }
};

struct SymmetryReport {
  std::vector<SymmetryEntry> entries;
  double max_reflection = 0.0;
  double max_point = 0.0;
};

/// Reflection residuals about every height extremum (vertical mirror line) and
/// point-symmetry residuals about every zero of z, sampled at `offsets`
/// arclength offsets on both sides.
inline SymmetryReport symmetry_residuals(const Profile& p, int offsets = 200) {
  SymmetryReport report;
  if (p.is_flat()) {
    const double c = 0.5 * p.s_end();
    report.entries.push_back({SymmetryKind::Reflection, c, c, 0.0, 0.0, 0.0});
    report.entries.push_back({SymmetryKind::Point, c, c, 0.0, 0.0, 0.0});
    return report;
  }
  for (const auto& e : p.events()) {
    const bool refl = e.kind == EventKind::HeightExtremum;
    if (!refl && e.kind != EventKind::ZZero) continue;
    const double span = std::min(e.s, p.s_end() - e.s);
    if (!(span > 0.0)) continue;
    SymmetryEntry entry{refl ? SymmetryKind::Reflection : SymmetryKind::Point, e.s, span};
    const ProfileState c = e.state;
    for (int j = 1; j <= offsets; ++j) {
      const double ds = span * j / offsets;
      const ProfileState up = p.at(std::min(c.s + ds, p.s_end()));
      const ProfileState dn = p.at(std::max(c.s - ds, 0.0));
      entry.dx = std::max(entry.dx, std::abs(up.x + dn.x - 2.0 * c.x));
      if (refl) {
        entry.dz = std::max(entry.dz, std::abs(up.z - dn.z));
        entry.dtheta = std::max(entry.dtheta, std::abs(up.theta + dn.theta - 2.0 * e.level));
      } else {
        entry.dz = std::max(entry.dz, std::abs(up.z + dn.z));
        entry.dtheta = std::max(entry.dtheta, std::abs(up.theta - dn.theta));
      }
    }
    if (refl)
      report.max_reflection = std::max(report.max_reflection, entry.max());
    else
      report.max_point = std::max(report.max_point, entry.max());
    report.entries.push_back(entry);
  }
  if (report.entries.empty()) fail(ErrorCode::NoEvent, "no height extremum or zero with room on both sides");
  return report;
}

}  // namespace capchan
