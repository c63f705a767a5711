#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "capchan/capchan.hpp"
#include "capchan/cli.hpp"

using namespace capchan;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("capchan_test_" + name);
}

TEST(Io, NumberFormat) {
  EXPECT_EQ(io::num(0.1), "0.10000000000000001");
  EXPECT_EQ(io::num(2.0), "2");
  EXPECT_EQ(io::Object::json_number(std::nan("")), "null");
  EXPECT_EQ(io::quote("a\"b\n"), "\"a\\\"b\\n\"");
}

TEST(Io, CsvRoundTripIsByteIdentical) {
  const Profile p = integrate(0.83, -1.7, 12.0);
  std::ostringstream a;
  io::write_profile_csv(a, p);
  std::istringstream in(a.str());
  const auto states = io::read_profile_csv(in);
  ASSERT_EQ(states.size(), p.samples().size());
  for (std::size_t i = 0; i < states.size(); ++i) EXPECT_EQ(states[i].z, p.samples()[i].z);
  std::ostringstream b;
  io::write_states_csv(b, states);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Io, CsvErrors) {
  std::istringstream bad_header("s,x,z\n");
  EXPECT_THROW(io::read_profile_csv(bad_header), Error);
  std::istringstream bad_row("s,x,z,theta\n1,2,3\n");
  EXPECT_THROW(io::read_profile_csv(bad_row), Error);
  std::istringstream bad_num("s,x,z,theta\n1,2,3,x\n");
  EXPECT_THROW(io::read_profile_csv(bad_num), Error);
}

TEST(Io, EventsSidecarRoundTrip) {
  const Profile p = integrate(-1.5, -1.0, 15.0);
  const std::string text = io::events_json(p.events());
  const auto back = io::parse_events_json(text);
  ASSERT_EQ(back.size(), p.events().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].kind, p.events()[i].kind);
    EXPECT_EQ(back[i].s, p.events()[i].s);
    EXPECT_EQ(back[i].state.z, p.events()[i].state.z);
  }
  EXPECT_EQ(io::events_json(back), text);
}

TEST(Io, SuiteConfigParsing) {
  const auto cfg = io::parse_suite_config(
      R"({"kappa_range":[0.5,2],"kappa_count":4,"gamma_range":[0,1],"gamma_count":2,"u0_range":[1,2],"u0_count":1,"seed":9,"bounds":["B1","B4"]})");
  EXPECT_EQ(cfg.kappa_count, 4u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.bounds.size(), 2u);
  EXPECT_THROW(io::parse_suite_config("{\"kappa_rnage\":[1,2]}"), Error);
  EXPECT_THROW(io::parse_suite_config("{\"bounds\":[\"B0\"]}"), Error);
  EXPECT_THROW(io::parse_suite_config("not json"), Error);
}

TEST(Cli, SolveFlatLine) {
  const auto r = run({"solve", "--kappa", "1", "--z0", "0", "--s-max", "2", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  const auto states = io::read_profile_csv(in);
  ASSERT_FALSE(states.empty());
  for (const auto& st : states) EXPECT_EQ(st.z, 0.0);
}

TEST(Cli, SolveOutputRoundTrips) {
  const auto r = run({"solve", "--kappa", "2", "--z0", "0.4", "--s-max", "6", "--sample-spacing", "0.05"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::ostringstream again;
  io::write_states_csv(again, io::read_profile_csv(in));
  EXPECT_EQ(again.str(), r.out);
}

TEST(Cli, SolveWritesEventSidecar) {
  const auto path = temp_path("events.json");
  const auto r = run({"solve", "--kappa", "-1", "--z0", "-1.5", "--s-max", "10", "--events", path.string()});
  ASSERT_EQ(r.code, 0);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  const auto events = io::parse_events_json(ss.str());
  EXPECT_FALSE(events.empty());
  std::filesystem::remove(path);
}

TEST(Cli, ClassifyJson) {
  const auto r = run({"classify", "--kappa", "-1", "--z0", "-1.5"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("regime"), "PendentOscillatingVertical");
  EXPECT_TRUE(j.at("boundary_flags").empty());
}

TEST(Cli, ShootAngleInsideLaplaceBracket) {
  const auto r = run({"shoot-angle", "--kappa", "1", "--half-width", "1", "--gamma", "0"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const double u0 = j.at("u0");
  EXPECT_GT(u0, 0.78539);
  EXPECT_LT(u0, 1.0);
  EXPECT_EQ(j.at("bracket").size(), 2u);
}

TEST(Cli, DegreesConvertOnce) {
  const auto a = run({"shoot-angle", "--kappa", "1", "--half-width", "1", "--gamma", "30", "--degrees"});
  const auto b = run({"shoot-angle", "--kappa", "1", "--half-width", "1", "--gamma", io::num(kPi / 6)});
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, OtherSubcommands) {
  EXPECT_EQ(run({"period", "--kappa", "1", "--z0", "1"}).code, 0);
  EXPECT_EQ(run({"vertical-points", "--kappa", "-1", "--z0", "-1.5"}).code, 0);
  EXPECT_EQ(run({"shoot-volume", "--kappa", "1", "--gamma", "1", "--volume", "0.5"}).code, 0);
  EXPECT_EQ(run({"extent", "--kappa", "1", "--z0", "0.5", "--gamma", "2"}).code, 0);
  const auto fz = run({"first-zero", "--kappa", "-1", "--z0", "-1"});
  ASSERT_EQ(fz.code, 0);
  EXPECT_NEAR(nlohmann::json::parse(fz.out).at("R").get<double>(), 1.24917406386576, 1e-9);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"classify", "--kappa", "abc", "--z0", "1"}).code, 2);
  EXPECT_EQ(run({"classify", "--z0", "1"}).code, 2);
  EXPECT_EQ(run({"classify", "--kappa", "0", "--z0", "1"}).code, 2);
  EXPECT_EQ(run({"classify", "--kappa", "1", "--z0", "1", "--format", "csv"}).code, 2);
  EXPECT_EQ(run({"vertical-points", "--kappa", "-1", "--z0", "-1"}).code, 1);
  EXPECT_EQ(run({"period", "--kappa", "-1", "--z0", "-2"}).code, 1);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("sweep"), std::string::npos);
  const auto usage = run({"frobnicate"});
  EXPECT_NE(usage.err.find("verify"), std::string::npos);
}

TEST(Cli, SweepRegimeColumnFlipsAtThresholds) {
  const auto r = run({"sweep", "--kappa", "-1", "--z0-min", "-2.2", "--z0-max", "-0.1", "--z0-count", "200"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,kappa,z0,regime,boundary_flags,T,error");
  const double step = 2.1 / 199;
  std::string prev;
  int changes = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    const double z0 = std::stod(f[2]);
    if (!prev.empty() && f[3] != prev) {
      ++changes;
      const double edge = prev == "PendentPeriodicNegative" ? -2.0 : -std::sqrt(2.0);
      EXPECT_LE(std::abs(z0 - edge), step) << prev << " -> " << f[3];
    }
    prev = f[3];
  }
  EXPECT_EQ(changes, 2);
}

TEST(Cli, SweepEmptyGridAndDeterminism) {
  const auto e = run({"sweep", "--kappa", "1", "--z0-min", "0", "--z0-max", "1", "--z0-count", "0"});
  EXPECT_EQ(e.code, 0);
  EXPECT_EQ(e.out, "index,kappa,z0,regime,boundary_flags,T,error\n");
  const std::vector<std::string> args{"sweep",       "--mode",      "shoot",       "--half-width", "1",
                                      "--kappa-min", "0.5",         "--kappa-max", "2",            "--kappa-count",
                                      "3",           "--gamma-min", "0",           "--gamma-max",  "1.2",
                                      "--gamma-count", "3",         "--jitter",    "--seed",       "5"};
  EXPECT_EQ(run(args).out, run(args).out);
  const auto b = run({"sweep", "--mode", "bounds", "--kappa", "1", "--gamma", "0.3", "--z0", "0.8", "--bounds",
                      "B3,B4", "--format", "json"});
  ASSERT_EQ(b.code, 0) << b.err;
  std::istringstream in(b.out);
  int rows = 0;
  for (std::string line; std::getline(in, line); ++rows)
    EXPECT_EQ(nlohmann::json::parse(line).at("status"), "Holds");
  EXPECT_EQ(rows, 2);
}

TEST(Cli, VerifyWithConfig) {
  const auto path = temp_path("suite.json");
  {
    std::ofstream f(path);
    f << R"({"kappa_range":[0.5,2],"kappa_count":2,"gamma_range":[0,1.5],"gamma_count":2,"u0_range":[0.5,1],"u0_count":1,"seed":7,"bounds":["B3","B6","B12"]})";
  }
  const auto a = run({"verify", "--config", path.string()});
  const auto b = run({"verify", "--config", path.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\"summary\":true"), std::string::npos);
  // B12 is quarantined: --strict ignores its violations.
  EXPECT_EQ(run({"verify", "--config", path.string(), "--strict"}).code, 0);
  EXPECT_EQ(run({"verify", "--config", "/nonexistent/suite.json"}).code, 2);
  std::filesystem::remove(path);
}

}  // namespace
