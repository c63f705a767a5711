#include <gtest/gtest.h>

#include <cmath>

#include "capchan/capchan.hpp"
#include "oracle.hpp"

using namespace capchan;

namespace {

TEST(Params, Validation) {
  EXPECT_THROW((FluidParams{0.0, std::nullopt, std::nullopt}.validate()), Error);
  EXPECT_THROW((FluidParams{1.0, -1.0, std::nullopt}.validate()), Error);
  EXPECT_THROW((FluidParams{1.0, std::nullopt, 4.0}.validate()), Error);
  EXPECT_NO_THROW((FluidParams{-2.0, 1.0, kPi}.validate()));
  try {
    integrate(1.0, 1.0, -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
  }
}

TEST(Dop853, HarmonicOscillatorMatchesClosedForm) {
  auto f = [](double, const ode::Vec<2>& y, ode::Vec<2>& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  ode::StepControl ctl;
  ctl.rel_tol = 1e-12;
  ctl.abs_tol = 1e-14;
  ode::Dop853<2, decltype(f)> st(f, 0.0, ode::Vec<2>{1.0, 0.0}, ctl, {1e300, 1e300});
  double worst = 0.0;
  while (st.t() < 20.0) {
    const auto seg = st.step(20.0);
    for (int k = 0; k <= 8; ++k) {
      const double s = seg.s0 + seg.h * k / 8.0;
      const auto y = seg.eval(s);
      worst = std::max(worst, std::abs(y[0] - std::cos(s)));
      worst = std::max(worst, std::abs(y[1] + std::sin(s)));
    }
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Integrate, FlatLineIsExact) {
  const Profile p = integrate(0.0, 1.0, 2.0);
  ASSERT_FALSE(p.samples().empty());
  for (const auto& st : p.samples()) {
    EXPECT_EQ(st.z, 0.0);
    EXPECT_EQ(st.theta, 0.0);
    EXPECT_EQ(st.x, st.s);
  }
  EXPECT_EQ(p.back().s, 2.0);
  EXPECT_EQ(p.at(1.25).x, 1.25);
}

TEST(Integrate, SessileHeightAtThetaPi) {
  const Profile p = integrate(1.0, 1.0, 50.0);
  int hits = 0;
  double zmin = 1e9, zmax = -1e9;
  for (const auto& st : p.samples()) {
    zmin = std::min(zmin, st.z);
    zmax = std::max(zmax, st.z);
  }
  for (const auto& e : p.events_of(EventKind::ThetaCrossing)) {
    const double m = std::fmod(e.level, 2.0 * kPi);
    if (std::abs(m - kPi) < 1e-9) {
      EXPECT_NEAR(e.state.z, std::sqrt(5.0), 1e-8);
      ++hits;
    }
  }
  EXPECT_GE(hits, 5);
  EXPECT_GE(zmin, 1.0 - 1e-9);
  EXPECT_LE(zmax, std::sqrt(5.0) + 1e-9);
}

TEST(Integrate, AsymptoticPendentRisesTowardZero) {
  // z = -2 cos(theta/2) approaches 0 like e^{-s}; the approach is unstable, so
  // stop while z is still well above the integration error.
  const Profile p = integrate(-2.0, -1.0, 12.0);
  double prev = -3.0;
  for (const auto& st : p.samples()) {
    EXPECT_LT(st.z, 0.0);
    EXPECT_GT(st.z, prev);
    prev = st.z;
  }
  EXPECT_NEAR(p.back().z, 0.0, 1e-3);
}

TEST(Integrate, FirstIntegralShrinksWithTolerance) {
  IntegratorOptions loose;
  IntegratorOptions tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  const Profile a = integrate(1.3, 2.7, 30.0, loose);
  const Profile b = integrate(1.3, 2.7, 30.0, tight);
  const double ra = max_first_integral_residual(a), rb = max_first_integral_residual(b);
  EXPECT_LE(ra, 1e-8);
  EXPECT_LT(rb, ra);
  // States agree with the tighter run.
  for (double s : {5.0, 17.0, 29.5}) {
    EXPECT_NEAR(a.at(s).x, b.at(s).x, 1e-7);
    EXPECT_NEAR(a.at(s).z, b.at(s).z, 1e-7);
  }
}

TEST(Integrate, AgreesWithFixedStepRk4) {
  // RK4 with 2e5 steps over 12 arclength units: error of order 1e-14.
  const Profile p = integrate(0.7, 1.9, 12.0);
  const auto y = oracle::rk4(0.7, 1.9, 12.0, 200000);
  const auto st = p.at(12.0);
  EXPECT_NEAR(st.x, y[0], 1e-8);
  EXPECT_NEAR(st.z, y[1], 1e-8);
  EXPECT_NEAR(st.theta, y[2], 1e-8);
}

TEST(Integrate, MirrorSymmetryOfSolutionMap) {
  const Profile p = integrate(0.9, -1.5, 20.0);
  const Profile q = integrate(-0.9, -1.5, 20.0);
  for (double s = 0.0; s <= 20.0; s += 0.37) {
    const auto a = p.at(s), b = q.at(s);
    EXPECT_NEAR(a.x, b.x, 1e-8);
    EXPECT_NEAR(a.z, -b.z, 1e-8);
    EXPECT_NEAR(a.theta, -b.theta, 1e-8);
  }
}

TEST(Integrate, UnitSpeedUnderRefinement) {
  const Profile p = integrate(1.0, 1.0, 10.0);
  double prev = 1.0;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const auto a = p.at(4.0), b = p.at(4.0 + h);
    const double dx = (b.x - a.x) / h, dz = (b.z - a.z) / h;
    const double dev = std::abs(dx * dx + dz * dz - 1.0);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Integrate, EventsSatisfyTheirConditions) {
  const Profile p = integrate(-1.5, -1.0, 30.0);
  ASSERT_FALSE(p.events_of(EventKind::VerticalPoint).empty());
  for (const auto& e : p.events_of(EventKind::VerticalPoint)) EXPECT_LE(std::abs(std::cos(e.state.theta)), 1e-12);
  for (const auto& e : p.events_of(EventKind::ZZero)) EXPECT_LE(std::abs(e.state.z), 1e-12);
  for (const auto& e : p.events()) {
    EXPECT_GE(e.s, 0.0);
    EXPECT_LE(e.s, p.s_end());
  }
  double prev = -1.0;
  for (const auto& st : p.samples()) {
    EXPECT_GT(st.s, prev);
    prev = st.s;
  }
}

TEST(Integrate, OutOfRangeEvaluationThrows) {
  const Profile p = integrate(1.0, 1.0, 3.0);
  EXPECT_THROW((void)p.at(3.5), Error);
  EXPECT_THROW((void)p.at(-0.1), Error);
}

TEST(Integrate, GraphReductionSatisfiesLaplaceEquation) {
  // u''/(1+u'^2)^{3/2} = kappa u on 0 <= theta < pi/2, by central differences in x.
  const double kappa = 1.0, z0 = 0.6;
  const Profile p = integrate(z0, kappa, 3.0);
  const auto v = p.first(EventKind::VerticalPoint);
  ASSERT_TRUE(v);
  const GraphView g(p, v->s);
  const double r = 0.5 * g.r_max();
  double prev = 1.0;
  for (double h : {1e-2, 3e-3, 1e-3}) {
    const double um = g.u(r - h), u = g.u(r), up = g.u(r + h);
    const double d1 = (up - um) / (2 * h), d2 = (up - 2 * u + um) / (h * h);
    const double res = std::abs(d2 / std::pow(1 + d1 * d1, 1.5) - kappa * u);
    EXPECT_LT(res, prev);
    prev = res;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(HeightSquared, ClosedForm) {
  EXPECT_DOUBLE_EQ(height_squared_from_theta(0.0, 0.7, 3.0), 0.49);
  EXPECT_DOUBLE_EQ(height_squared_from_theta(0.0, -0.7, -3.0), 0.49);
  EXPECT_NEAR(height_squared_from_theta(kPi, 1.0, 1.0), 5.0, 1e-15);
  try {
    height_squared_from_theta(kPi, -1.0, -2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnreachableAngle);
  }
  // z0=1, kappa=2 at theta=pi/2.
  EXPECT_NEAR(height_squared_from_theta(kPi / 2, 1.0, 2.0), 2.0, 1e-15);
}

TEST(Quadrature, IntegrateAlongMatchesAngleQuadrature) {
  // Integral of z cos(theta) ds up to inclination pi/3 equals sin(pi/3)/kappa.
  const double u0 = 0.8, kappa = 1.4, psi = kPi / 3;
  const Profile p = integrate_to_angle(u0, kappa, psi);
  const double area = integrate_along(p, 0.0, p.back().s, [](const ProfileState& st) { return st.z * std::cos(st.theta); });
  EXPECT_NEAR(area, std::sin(psi) / kappa, 1e-10);
  EXPECT_NEAR(p.back().x, oracle::sessile_r(u0, kappa, psi), 1e-9);
  EXPECT_NEAR(p.back().s, oracle::sessile_s(u0, kappa, psi), 1e-9);
}

TEST(Symmetry, SessileReflection) {
  const Profile p = integrate(1.0, 1.0, 20.0);
  const auto r = symmetry_residuals(p);
  ASSERT_FALSE(r.entries.empty());
  EXPECT_LE(r.max_reflection, 1e-7);
}

TEST(Symmetry, FlatIsExactlySymmetric) {
  const auto r = symmetry_residuals(integrate(0.0, 1.0, 5.0));
  EXPECT_EQ(r.max_reflection, 0.0);
  EXPECT_EQ(r.max_point, 0.0);
}

TEST(Symmetry, PendentGraphPointSymmetry) {
  const Profile p = integrate(-1.0, -1.0, 20.0);
  const auto r = symmetry_residuals(p);
  bool has_point = false;
  for (const auto& e : r.entries) has_point |= e.kind == SymmetryKind::Point;
  EXPECT_TRUE(has_point);
  EXPECT_LE(r.max_point, 1e-7);
  EXPECT_LE(r.max_reflection, 1e-7);
}

TEST(Symmetry, NoQualifyingEvent) {
  IntegratorOptions o;
  o.events = EventSet::none();
  try {
    symmetry_residuals(integrate(1.0, 1.0, 0.5, o));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoEvent);
  }
}

// Property: the first integral holds for random parameters in both signs.
TEST(Property, FirstIntegralRandom) {
  oracle::Gen gen(11);
  for (int i = 0; i < 40; ++i) {
    const double kappa = gen.sign() * gen.log_uniform(0.1, 10.0);
    const double z0 = gen.uniform(-3.0, 3.0);
    const Profile p = integrate(z0, kappa, 50.0);
    EXPECT_LE(max_first_integral_residual(p), 1e-8) << "kappa=" << kappa << " z0=" << z0;
  }
}

// Property: scaling (x, z, s) -> lambda (x, z, s), kappa -> kappa / lambda^2.
TEST(Property, ScalingInvariance) {
  oracle::Gen gen(12);
  for (int i = 0; i < 10; ++i) {
    const double kappa = gen.sign() * gen.log_uniform(0.2, 5.0), z0 = gen.uniform(-2.0, 2.0);
    const double lam = gen.log_uniform(0.5, 2.0);
    const Profile a = integrate(z0, kappa, 8.0);
    const Profile b = integrate(lam * z0, kappa / (lam * lam), 8.0 * lam);
    for (double s : {1.0, 4.0, 7.5}) {
      EXPECT_NEAR(b.at(lam * s).x, lam * a.at(s).x, 1e-7 * lam);
      EXPECT_NEAR(b.at(lam * s).z, lam * a.at(s).z, 1e-7 * lam);
      EXPECT_NEAR(b.at(lam * s).theta, a.at(s).theta, 1e-7);
    }
  }
}

}  // namespace
