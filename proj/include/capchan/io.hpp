#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capchan/bounds.hpp"
#include "capchan/classify.hpp"
#include "capchan/error.hpp"
#include "capchan/profile.hpp"
#include "capchan/shoot.hpp"

namespace capchan::io {

/// 17 significant digits: enough to read back the same double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

// nlohmann's serializer prints shortest round-trip digits; the output
// contract is fixed at 17, so objects are assembled by hand.
class Object {
 public:
  Object& field(std::string_view key, double v) { return raw(key, json_number(v)); }
  Object& field(std::string_view key, std::optional<double> v) { return raw(key, v ? json_number(*v) : "null"); }
  Object& field(std::string_view key, std::string_view v) { return raw(key, quote(v)); }
  Object& field(std::string_view key, const char* v) { return raw(key, quote(v)); }
  Object& field(std::string_view key, bool v) { return raw(key, v ? "true" : "false"); }
  Object& field(std::string_view key, int v) { return raw(key, std::to_string(v)); }
  Object& field(std::string_view key, std::size_t v) { return raw(key, std::to_string(v)); }
  Object& raw(std::string_view key, std::string_view json) {
    if (!body_.empty()) body_ += ',';
    body_ += quote(key);
    body_ += ':';
    body_ += json;
    return *this;
  }
  [[nodiscard]] std::string str() const { return "{" + body_ + "}"; }

  /// JSON has no inf/nan; they become null.
  static std::string json_number(double v) { return std::isfinite(v) ? num(v) : "null"; }

 private:
  std::string body_;
};

inline std::string array(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Profiles

inline constexpr std::string_view kProfileHeader = "s,x,z,theta";

inline void write_states_csv(std::ostream& os, const std::vector<ProfileState>& states) {
  os << kProfileHeader << '\n';
  for (const auto& st : states) os << num(st.s) << ',' << num(st.x) << ',' << num(st.z) << ',' << num(st.theta) << '\n';
}

inline void write_profile_csv(std::ostream& os, const Profile& p) { write_states_csv(os, p.samples()); }

inline double parse_double(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) fail(ErrorCode::ParseError, "not a number: '" + s + "'");
  return v;
}

inline std::vector<ProfileState> read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kProfileHeader) fail(ErrorCode::ParseError, "expected header s,x,z,theta");
  std::vector<ProfileState> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 4) fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 4 fields");
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

inline std::string to_json(const Event& e) {
  return Object()
      .field("kind", to_string(e.kind))
      .field("s", e.s)
      .field("x", e.state.x)
      .field("z", e.state.z)
      .field("theta", e.state.theta)
      .field("level", e.level)
      .str();
}

inline std::string events_json(const std::vector<Event>& events) {
  std::vector<std::string> items;
  for (const auto& e : events) items.push_back(to_json(e));
  return Object().raw("events", array(items)).str();
}

inline std::vector<Event> parse_events_json(std::string_view text) {
  std::vector<Event> out;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& e : j.at("events")) {
      Event ev;
      const auto kind = event_kind_from_string(e.at("kind").get<std::string>());
      if (!kind) fail(ErrorCode::ParseError, "unknown event kind " + e.at("kind").dump());
      ev.kind = *kind;
      ev.s = e.at("s").get<double>();
      ev.level = e.at("level").get<double>();
      ev.state = {ev.s, e.at("x").get<double>(), e.at("z").get<double>(), e.at("theta").get<double>()};
      out.push_back(ev);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Results

inline std::string to_json(const Regime& r, double z0, double kappa) {
  std::vector<std::string> flags;
  for (auto f : r.boundary_flags) flags.push_back(quote(to_string(f)));
  Object o;
  o.field("regime", to_string(r.tag)).raw("boundary_flags", array(flags)).field("kappa", kappa).field("z0", z0);
  if (kappa < 0.0) {
    const auto t = pendent_thresholds(kappa);
    o.field("winding_threshold", t.winding).field("graph_threshold", t.graph);
  }
  return o.str();
}

inline std::string to_json(const PeriodData& p) {
  return Object()
      .field("T", p.T)
      .field("translation", p.translation)
      .field("winding", p.winding)
      .field("residual", p.residual)
      .field("s0", p.s0)
      .str();
}

inline std::string to_json(const std::vector<VerticalPointRecord>& pts) {
  std::vector<std::string> items;
  for (const auto& v : pts) items.push_back(Object().field("s", v.s).field("x", v.x).field("z", v.z).field("side", v.side).str());
  return Object().raw("vertical_points", array(items)).str();
}

inline std::string to_json(const CriticalHeights& c) {
  return Object()
      .field("z_tangent", c.z_tangent)
      .field("z_closed", c.z_closed)
      .field("bracket_width", c.bracket_width)
      .field("iterations", c.iterations)
      .field("tangent_above_closed", c.tangent_above_closed)
      .field("tangent_monotone", c.tangent_monotone)
      .field("closed_monotone", c.closed_monotone)
      .field("tangent_direction", c.tangent_direction)
      .field("closed_direction", c.closed_direction)
      .str();
}

inline std::string to_json(const ShootResult& r) {
  return Object()
      .field("u0", r.u0)
      .field("residual", r.residual)
      .field("iterations", r.iterations)
      .raw("bracket", array({Object::json_number(r.lo), Object::json_number(r.hi)}))
      .str();
}

inline std::string to_json(const ChannelGeometry& g) {
  return Object()
      .field("r_gamma", g.r_gamma)
      .field("u_gamma", g.u_gamma)
      .field("R_vertical", g.R_vertical)
      .field("u_vertical", g.u_vertical)
      .field("r_o", g.r_o)
      .field("volume", g.volume)
      .field("height_residual", g.height_residual)
      .str();
}

inline std::string to_json(const BoundReport& r) {
  Object o;
  o.field("bound_id", r.bound_id)
      .field("check", r.check)
      .field("lhs", r.lhs)
      .field("rhs", r.rhs)
      .field("margin", r.margin)
      .field("status", to_string(r.status))
      .field("kappa", r.kappa)
      .field("a", r.a)
      .field("gamma", r.gamma)
      .field("u0", r.u0);
  if (r.at) o.field("at", *r.at);
  if (!r.diagnostic.empty()) o.field("diagnostic", r.diagnostic);
  return o.str();
}

/// JSON lines, one report per line, then a summary line.
inline void write_suite(std::ostream& os, const SuiteResult& res) {
  for (const auto& r : res.reports) os << to_json(r) << '\n';
  os << Object()
            .field("summary", true)
            .field("holds", res.holds)
            .field("near_tie", res.near_tie)
            .field("violated", res.violated)
            .field("skipped", res.skipped)
            .str()
     << '\n';
}

// ---------------------------------------------------------------------------
// Suite config

inline SuiteConfig parse_suite_config(std::string_view text) {
  SuiteConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) fail(ErrorCode::ParseError, "suite config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
      auto range = [&](std::array<double, 2>& dst) {
        if (!v.is_array() || v.size() != 2) fail(ErrorCode::ParseError, key + " must be [lo, hi]");
        dst = {v[0].get<double>(), v[1].get<double>()};
        if (!(dst[0] <= dst[1])) fail(ErrorCode::ParseError, key + " must have lo <= hi");
      };
      if (key == "kappa_range") range(cfg.kappa_range);
      else if (key == "gamma_range") range(cfg.gamma_range);
      else if (key == "u0_range") range(cfg.u0_range);
      else if (key == "kappa_count") cfg.kappa_count = v.get<std::size_t>();
      else if (key == "gamma_count") cfg.gamma_count = v.get<std::size_t>();
      else if (key == "u0_count") cfg.u0_count = v.get<std::size_t>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "half_width") cfg.half_width = v.get<double>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "bounds") {
        cfg.bounds = v.get<std::vector<std::string>>();
        for (const auto& id : cfg.bounds) bound_info(id);
      } else {
        fail(ErrorCode::ParseError, "unknown suite config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  if (!(cfg.half_width > 0.0)) fail(ErrorCode::ParseError, "half_width must be positive");
  return cfg;
}

}  // namespace capchan::io
