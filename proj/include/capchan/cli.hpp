#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "capchan/bounds.hpp"
#include "capchan/classify.hpp"
#include "capchan/error.hpp"
#include "capchan/io.hpp"
#include "capchan/profile.hpp"
#include "capchan/shoot.hpp"

namespace capchan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct Range {
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 1;
};

struct CliConfig {
  std::string subcommand;
  std::optional<double> kappa, z0, half_width, gamma, volume;
  double s_max = 10.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double sample_spacing = 0.0;
  std::uint64_t seed = 0;
  std::string format;
  std::string out = "-";
  std::string events_path;
  std::string config_path;
  std::string bounds;
  bool degrees = false;
  bool strict = false;
  bool jitter = false;
  int grid_points = 21;
  // sweep
  std::string mode = "classify";
  Range kappa_range, z0_range, gamma_range;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw UsageError(std::string("missing required flag ") + flag);
  return *v;
}

inline IntegratorOptions options(const CliConfig& c) {
  IntegratorOptions o;
  o.rel_tol = c.rel_tol;
  o.abs_tol = c.abs_tol;
  return o;
}

inline unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CAPCHAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

/// Inclusive linear grid; with `jitter` each point after the first moves to
/// a seeded position inside its cell instead.
inline std::vector<double> axis(const Range& r, bool jitter, std::mt19937_64& rng, const char* name) {
  std::vector<double> v;
  if (r.count == 0) return v;
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) throw UsageError(std::string("missing range for ") + name);
  if (r.count == 1) return {r.lo};
  for (std::size_t i = 0; i < r.count; ++i) {
    if (jitter) {
      const double xi = i == 0 ? 0.0 : static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v.push_back(r.lo + (r.hi - r.lo) * (static_cast<double>(i) + xi) / static_cast<double>(r.count));
    } else {
      v.push_back(r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(r.count - 1));
    }
  }
  return v;
}

/// A fixed --flag value stands in for a range that was not given.
inline Range resolve(Range r, const std::optional<double>& fixed) {
  if (!std::isfinite(r.lo) && !std::isfinite(r.hi) && fixed) return {*fixed, *fixed, r.count == 0 ? std::size_t{0} : std::size_t{1}};
  return r;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;  // (csv text, json text)

  void write(std::ostream& os, bool json) const {
    if (!json) {
      for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
      os << '\n';
    }
    for (const auto& row : rows) {
      if (json) {
        io::Object o;
        for (std::size_t i = 0; i < columns.size(); ++i) o.raw(columns[i], row[i].second);
        os << o.str() << '\n';
      } else {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i].first);
        os << '\n';
      }
    }
  }
};

using Cell = std::pair<std::string, std::string>;
inline Cell cell(double v) { return {std::isfinite(v) ? io::num(v) : "", io::Object::json_number(v)}; }
inline Cell cell(std::optional<double> v) { return v ? cell(*v) : Cell{"", "null"}; }
inline Cell cell(const std::string& s) { return {s, io::quote(s)}; }
inline Cell cell(std::size_t v) { return {std::to_string(v), std::to_string(v)}; }

template <class F>
void parallel_for(std::size_t n, F&& f) {
  const auto threads = static_cast<unsigned>(std::min<std::size_t>(thread_cap(), std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

inline std::string error_text(const std::exception& e) { return e.what(); }

inline Table sweep(const CliConfig& c) {
  std::mt19937_64 rng(c.seed);
  const auto opts = options(c);
  const auto ks = axis(resolve(c.kappa_range, c.kappa), c.jitter, rng, "kappa");
  Table t;
  if (c.mode == "classify") {
    const auto zs = axis(resolve(c.z0_range, c.z0), c.jitter, rng, "z0");
    t.columns = {"index", "kappa", "z0", "regime", "boundary_flags", "T", "error"};
    t.rows.resize(ks.size() * zs.size());
    parallel_for(t.rows.size(), [&](std::size_t i) {
      const double kappa = ks[i / zs.size()], z0 = zs[i % zs.size()];
      std::string regime, flags, err;
      std::optional<double> T;
      try {
        const Regime r = classify(z0, kappa);
        regime = to_string(r.tag);
        for (auto f : r.boundary_flags) flags += (flags.empty() ? "" : ";") + std::string(to_string(f));
        if (r.tag != RegimeTag::FlatLine && r.tag != RegimeTag::PendentAsymptotic) T = period(z0, kappa, opts).T;
      } catch (const std::exception& e) {
        err = error_text(e);
      }
      t.rows[i] = {cell(i), cell(kappa), cell(z0), cell(regime), cell(flags), cell(T), cell(err)};
    });
  } else if (c.mode == "shoot") {
    const double a = need(c.half_width, "--half-width");
    const auto gs = axis(resolve(c.gamma_range, c.gamma), c.jitter, rng, "gamma");
    t.columns = {"index", "kappa", "gamma", "a", "u0", "residual", "iterations", "error"};
    t.rows.resize(ks.size() * gs.size());
    parallel_for(t.rows.size(), [&](std::size_t i) {
      const double kappa = ks[i / gs.size()], gamma = gs[i % gs.size()];
      std::optional<double> u0, res, it;
      std::string err;
      try {
        const auto r = shoot_contact_angle_any(kappa, a, gamma, opts);
        u0 = r.u0;
        res = r.residual;
        it = static_cast<double>(r.iterations);
      } catch (const std::exception& e) {
        err = error_text(e);
      }
      t.rows[i] = {cell(i), cell(kappa), cell(gamma), cell(a), cell(u0), cell(res), cell(it), cell(err)};
    });
  } else if (c.mode == "bounds") {
    const auto gs = axis(resolve(c.gamma_range, c.gamma), c.jitter, rng, "gamma");
    const double u0 = need(c.z0, "--z0");
    const double a = c.half_width.value_or(1.0);
    std::vector<std::string> ids = all_bound_ids();
    if (!c.bounds.empty()) {
      ids.clear();
      std::stringstream ss(c.bounds);
      for (std::string id; std::getline(ss, id, ',');) {
        bound_info(id);
        ids.push_back(id);
      }
    }
    t.columns = {"index", "kappa", "gamma", "u0", "bound_id", "status", "check", "margin", "error"};
    const std::size_t npts = ks.size() * gs.size();
    t.rows.resize(npts * ids.size());
    parallel_for(npts, [&](std::size_t p) {
      const double kappa = ks[p / gs.size()], gamma = gs[p % gs.size()];
      BoundContext ctx(FluidParams{kappa, a, gamma}, u0, opts);
      for (std::size_t b = 0; b < ids.size(); ++b) {
        std::string status, check, err;
        std::optional<double> margin;
        try {
          const auto r = evaluate_bound(ids[b], ctx);
          status = to_string(r.status);
          check = r.check;
          margin = r.margin;
        } catch (const Error& e) {
          status = e.code() == ErrorCode::WrongRegime ? "Skipped" : "Violated";
          err = e.what();
        }
        t.rows[p * ids.size() + b] = {cell(p),     cell(kappa), cell(gamma),  cell(u0), cell(ids[b]),
                                      cell(status), cell(check), cell(margin), cell(err)};
      }
    });
  } else {
    throw UsageError("unknown sweep mode '" + c.mode + "' (classify, shoot, bounds)");
  }
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

inline int execute(const CliConfig& c, std::ostream& out) {
  const auto opts = options(c);
  const bool csv = c.format == "csv";
  const bool json = c.format == "json";
  std::ostringstream os;
  auto json_only = [&] {
    if (csv) throw UsageError(c.subcommand + " writes JSON only");
  };
  const auto& cmd = c.subcommand;
  int code = kExitOk;

  if (cmd == "solve") {
    IntegratorOptions o = opts;
    o.events = c.events_path.empty() && !json ? EventSet::none() : EventSet::all();
    o.sample_spacing = c.sample_spacing;
    const Profile p = integrate(need(c.z0, "--z0"), need(c.kappa, "--kappa"), c.s_max, o);
    if (json) {
      std::vector<std::string> samples;
      for (const auto& st : p.samples())
        samples.push_back(io::Object().field("s", st.s).field("x", st.x).field("z", st.z).field("theta", st.theta).str());
      std::vector<std::string> events;
      for (const auto& e : p.events()) events.push_back(io::to_json(e));
      os << io::Object()
                .field("kappa", p.kappa())
                .field("z0", p.z0())
                .raw("samples", io::array(samples))
                .raw("events", io::array(events))
                .str()
         << '\n';
    } else {
      io::write_profile_csv(os, p);
    }
    if (!c.events_path.empty()) write_file(c.events_path, io::events_json(p.events()) + "\n");
  } else if (cmd == "classify") {
    json_only();
    const double z0 = need(c.z0, "--z0"), kappa = need(c.kappa, "--kappa");
    os << io::to_json(classify(z0, kappa), z0, kappa) << '\n';
  } else if (cmd == "period") {
    json_only();
    os << io::to_json(period(need(c.z0, "--z0"), need(c.kappa, "--kappa"), opts)) << '\n';
  } else if (cmd == "vertical-points") {
    json_only();
    os << io::to_json(vertical_points(need(c.z0, "--z0"), need(c.kappa, "--kappa"), opts)) << '\n';
  } else if (cmd == "critical") {
    json_only();
    os << io::to_json(critical_heights(need(c.kappa, "--kappa"), opts, c.grid_points)) << '\n';
  } else if (cmd == "shoot-angle") {
    json_only();
    os << io::to_json(shoot_contact_angle_any(need(c.kappa, "--kappa"), need(c.half_width, "--half-width"),
                                              need(c.gamma, "--gamma"), opts))
       << '\n';
  } else if (cmd == "shoot-volume") {
    json_only();
    os << io::to_json(shoot_volume(need(c.kappa, "--kappa"), need(c.gamma, "--gamma"), need(c.volume, "--volume"), opts))
       << '\n';
  } else if (cmd == "extent") {
    json_only();
    os << io::to_json(channel_extent(need(c.z0, "--z0"), need(c.kappa, "--kappa"), need(c.gamma, "--gamma"), opts))
       << '\n';
  } else if (cmd == "first-zero") {
    json_only();
    const double z0 = need(c.z0, "--z0"), kappa = need(c.kappa, "--kappa");
    os << io::Object().field("kappa", kappa).field("z0", z0).field("R", pendent_first_zero(z0, kappa, opts)).str()
       << '\n';
  } else if (cmd == "verify") {
    json_only();
    SuiteConfig cfg = c.config_path.empty() ? SuiteConfig{} : io::parse_suite_config(read_file(c.config_path));
    if (!c.bounds.empty()) {
      cfg.bounds.clear();
      std::stringstream ss(c.bounds);
      for (std::string id; std::getline(ss, id, ',');) cfg.bounds.push_back(id);
    }
    cfg.threads = std::min(cfg.threads, thread_cap());
    const SuiteResult res = verify_suite(cfg, opts);
    io::write_suite(os, res);
    if (c.strict)
      for (const auto& r : res.reports)
        if (r.status == BoundStatus::Violated && !bound_info(r.bound_id).quarantined) code = kExitDomain;
  } else if (cmd == "sweep") {
    sweep(c).write(os, json);
  } else {
    throw UsageError("unknown subcommand " + cmd);
  }

  if (c.out == "-") {
    out << os.str();
  } else {
    write_file(c.out, os.str());
  }
  return code;
}

}  // namespace detail

/// Parses argv (without the program name) and runs the subcommand. Output
/// goes to `out` unless --out names a file; diagnostics go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capillary channel profiles: integration, regimes, shooting and bound checks", "capchan"};
  app.require_subcommand(1);
  CliConfig c;

  auto common = [&](CLI::App* s) {
    s->add_option("--kappa", c.kappa, "curvature coefficient (1/length^2)");
    s->add_option("--z0", c.z0, "initial height (u0 for sessile channels)");
    s->add_option("--half-width", c.half_width, "plate half-width a");
    s->add_option("--gamma", c.gamma, "contact angle (radians unless --degrees)");
    s->add_option("--s-max", c.s_max, "arclength to integrate")->capture_default_str();
    s->add_option("--rel-tol", c.rel_tol, "relative tolerance")->capture_default_str();
    s->add_option("--abs-tol", c.abs_tol, "absolute tolerance")->capture_default_str();
    s->add_option("--seed", c.seed, "seed for jittered grids")->capture_default_str();
    s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--out", c.out, "output path, - for stdout")->capture_default_str();
    s->add_flag("--degrees", c.degrees, "angles are given in degrees");
  };

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"solve", "integrate a directrix and write its samples"},
      {"classify", "regime of (kappa, z0)"},
      {"period", "period and translation of a periodic profile"},
      {"vertical-points", "vertical points over one period of an oscillating pendent profile"},
      {"critical", "closed-curve and self-tangent heights for kappa < 0"},
      {"shoot-angle", "centre height for a contact angle between plates"},
      {"shoot-volume", "centre height for a channel volume"},
      {"extent", "channel geometry for u0 and contact angle"},
      {"first-zero", "first zero of a pendent graph profile"},
      {"verify", "evaluate the bound suite"},
      {"sweep", "grid of classify, shoot or bounds results"},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    const std::string name = s.name;
    if (name == "solve") {
      sub->add_option("--events", c.events_path, "write events as JSON to this path");
      sub->add_option("--sample-spacing", c.sample_spacing, "extra samples every this much arclength");
    } else if (name == "shoot-volume") {
      sub->add_option("--volume", c.volume, "cross-sectional area per unit length")->required();
    } else if (name == "critical") {
      sub->add_option("--grid-points", c.grid_points, "samples for the monotonicity check")->capture_default_str();
    } else if (name == "verify") {
      sub->add_option("--config", c.config_path, "suite config JSON");
      sub->add_option("--bounds", c.bounds, "comma-separated bound ids");
      sub->add_flag("--strict", c.strict, "exit 1 on any violation outside quarantined bounds");
    } else if (name == "sweep") {
      sub->add_option("--mode", c.mode, "classify, shoot or bounds")->capture_default_str();
      sub->add_option("--kappa-min", c.kappa_range.lo);
      sub->add_option("--kappa-max", c.kappa_range.hi);
      sub->add_option("--kappa-count", c.kappa_range.count)->capture_default_str();
      sub->add_option("--z0-min", c.z0_range.lo);
      sub->add_option("--z0-max", c.z0_range.hi);
      sub->add_option("--z0-count", c.z0_range.count)->capture_default_str();
      sub->add_option("--gamma-min", c.gamma_range.lo);
      sub->add_option("--gamma-max", c.gamma_range.hi);
      sub->add_option("--gamma-count", c.gamma_range.count)->capture_default_str();
      sub->add_option("--bounds", c.bounds, "comma-separated bound ids (bounds mode)");
      sub->add_flag("--jitter", c.jitter, "seeded in-cell jitter instead of an inclusive grid");
    }
  }

  std::vector<const char*> argv{"capchan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "capchan: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  for (const auto* sub : app.get_subcommands()) c.subcommand = sub->get_name();
  if (c.format.empty()) c.format = (c.subcommand == "solve" || c.subcommand == "sweep") ? "csv" : "json";
  if (c.degrees) {
    const double k = kPi / 180.0;
    if (c.gamma) *c.gamma *= k;
    c.gamma_range.lo *= k;
    c.gamma_range.hi *= k;
  }

  try {
    return detail::execute(c, out);
  } catch (const UsageError& e) {
    err << "capchan: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "capchan: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InvalidParams:
      case ErrorCode::ParseError:
      case ErrorCode::UnknownBound: return kExitUsage;
      default: return kExitDomain;
    }
  } catch (const std::exception& e) {
    err << "capchan: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace capchan::cli
