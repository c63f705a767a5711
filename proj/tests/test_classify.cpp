#include <gtest/gtest.h>

#include <cmath>

#include "capchan/capchan.hpp"
#include "oracle.hpp"

using namespace capchan;

namespace {

TEST(Classify, Examples) {
  EXPECT_EQ(classify(0.5, 1.0).tag, RegimeTag::SessilePeriodic);
  EXPECT_EQ(classify(-0.5, 1.0).tag, RegimeTag::SessilePeriodic);
  EXPECT_EQ(classify(0.0, -3.0).tag, RegimeTag::FlatLine);
  EXPECT_EQ(classify(-2.0, -1.0).tag, RegimeTag::PendentAsymptotic);
  EXPECT_TRUE(classify(-2.0, -1.0).has(BoundaryFlag::OnAsymptoticBoundary));
  EXPECT_EQ(classify(-1.5, -1.0).tag, RegimeTag::PendentOscillatingVertical);
  EXPECT_EQ(classify(-1.0, -1.0).tag, RegimeTag::PendentGraph);
  EXPECT_EQ(classify(-2.5, -1.0).tag, RegimeTag::PendentPeriodicNegative);
  // z -> -z for kappa < 0.
  EXPECT_EQ(classify(1.5, -1.0).tag, RegimeTag::PendentOscillatingVertical);
  const Regime b = classify(-std::sqrt(2.0), -1.0);
  EXPECT_EQ(b.tag, RegimeTag::PendentGraph);
  EXPECT_TRUE(b.has(BoundaryFlag::OnGraphBoundary));
  EXPECT_THROW(classify(1.0, 0.0), Error);
}

TEST(Classify, FlipsAtThresholds) {
  for (double kappa : {-0.5, -1.0, -4.0}) {
    const auto t = pendent_thresholds(kappa);
    EXPECT_DOUBLE_EQ(t.winding, -2.0 / std::sqrt(-kappa));
    EXPECT_DOUBLE_EQ(t.graph, -std::sqrt(2.0 / -kappa));
    EXPECT_EQ(classify(t.winding * (1 + 1e-10), kappa).tag, RegimeTag::PendentPeriodicNegative);
    EXPECT_EQ(classify(t.winding * (1 - 1e-10), kappa).tag, RegimeTag::PendentOscillatingVertical);
    EXPECT_EQ(classify(t.graph * (1 + 1e-10), kappa).tag, RegimeTag::PendentOscillatingVertical);
    EXPECT_EQ(classify(t.graph * (1 - 1e-10), kappa).tag, RegimeTag::PendentGraph);
  }
}

TEST(Period, SessileWinding) {
  const auto p = period(1.0, 1.0);
  EXPECT_EQ(p.winding, 1);
  EXPECT_LE(p.residual, 1e-7);
  // T is the arclength for theta to go once round: twice the arclength to pi.
  EXPECT_NEAR(p.T, 2.0 * oracle::sessile_s(1.0, 1.0, kPi), 1e-9);
  EXPECT_GT(p.translation, 0.0);
}

TEST(Period, PendentGraphIsFourQuarterPeriods) {
  const auto p = period(-1.0, -1.0);
  ASSERT_TRUE(p.s0);
  EXPECT_NEAR(p.T, 4.0 * *p.s0, 1e-12);
  EXPECT_LE(p.residual, 1e-7);
  EXPECT_NEAR(p.translation, 4.0 * oracle::pendent_R(-1.0, -1.0), 1e-8);
  const Profile prof = integrate(-1.0, -1.0, 2.5 * p.T);
  for (double s = 0.0; s < p.T; s += p.T / 37) EXPECT_NEAR(prof.at(s + p.T).z, prof.at(s).z, 1e-7);
}

TEST(Period, NotPeriodic) {
  for (auto [z0, kappa] : {std::pair{-2.0, -1.0}, std::pair{0.0, 1.0}}) {
    try {
      period(z0, kappa);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotPeriodic);
    }
  }
}

TEST(VerticalPoints, HeightsAndCount) {
  for (auto [z0, h] : {std::pair{-1.5, 0.5}, std::pair{-1.9, std::sqrt(1.61)}}) {
    const auto v = vertical_points(z0, -1.0);
    ASSERT_EQ(v.size(), 4u);
    int sides = 0;
    for (const auto& r : v) {
      EXPECT_NEAR(std::abs(r.z), h, 1e-8);
      sides |= 1 << r.side;
    }
    EXPECT_EQ(sides, 0b1111);
  }
  // DERIVED, frozen from the first-integral oracle: sqrt(3.61 - 2).
  EXPECT_NEAR(std::abs(vertical_points(-1.9, -1.0).front().z), 1.2688577540449522, 1e-8);
}

TEST(VerticalPoints, GraphBoundaryDegeneratesToZeros) {
  const auto v = vertical_points(-std::sqrt(2.0), -1.0);
  ASSERT_FALSE(v.empty());
  for (const auto& r : v) EXPECT_NEAR(r.z, 0.0, 1e-8);
}

TEST(VerticalPoints, WrongRegime) {
  try {
    vertical_points(-1.0, -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongRegime);
  }
}

TEST(FirstZero, MatchesAngleQuadrature) {
  const auto p = integrate_to_first_zero(-1.0, -1.0);
  EXPECT_NEAR(p.back().x, oracle::pendent_R(-1.0, -1.0), 1e-9);
}

TEST(Critical, InsideIntervalAndOrdered) {
  const auto c = critical_heights(-1.0);
  EXPECT_GT(c.z_tangent, -2.0);
  EXPECT_LT(c.z_tangent, -std::sqrt(2.0));
  EXPECT_GT(c.z_closed, -2.0);
  EXPECT_LT(c.z_closed, -std::sqrt(2.0));
  EXPECT_LE(c.bracket_width, 1e-10 * 2.0);
  EXPECT_TRUE(c.tangent_above_closed);
  EXPECT_TRUE(c.tangent_monotone);
  EXPECT_TRUE(c.closed_monotone);
  EXPECT_NEAR(c.z_tangent, -1.710184815500777, 1e-9);
  EXPECT_NEAR(c.z_closed, -1.817817115095005, 1e-9);
}

TEST(Critical, ScalingLaw) {
  const auto a = critical_heights(-1.0), b = critical_heights(-4.0);
  EXPECT_NEAR(b.z_tangent, a.z_tangent / 2.0, 1e-8);
  EXPECT_NEAR(b.z_closed, a.z_closed / 2.0, 1e-8);
}

TEST(Critical, RequiresNegativeKappa) { EXPECT_THROW(critical_heights(1.0), Error); }

TEST(Critical, DefiningFunctionsVanish) {
  const auto c = critical_heights(-1.0);
  EXPECT_NEAR(closure_offset(c.z_closed, -1.0), 0.0, 1e-8);
  EXPECT_NEAR(tangency_offset(c.z_tangent, -1.0), 0.0, 1e-8);
}

// Morphology of the five sub-regimes between the thresholds at kappa = -1.
TEST(Morphology, FiveSubRegimes) {
  const auto c = critical_heights(-1.0);
  const double lo = -2.0, hi = -std::sqrt(2.0);
  const double zc = c.z_closed, zt = c.z_tangent;

  // Below z_closed: double points, drift towards negative x.
  const auto m1 = morphology(0.5 * (lo + zc), -1.0);
  EXPECT_TRUE(m1.has_double_points());
  EXPECT_EQ(m1.drift_sign(), -1);
  // At z_closed: closed curve.
  const auto m2 = morphology(zc, -1.0);
  EXPECT_TRUE(m2.closed);
  // Between: double points, positive drift.
  const auto m3 = morphology(0.5 * (zc + zt), -1.0);
  EXPECT_TRUE(m3.has_double_points());
  EXPECT_EQ(m3.drift_sign(), 1);
  // z_tangent separates curves with double points from embedded ones; at
  // the value itself the contact is a touch, which a crossing scan cannot see.
  EXPECT_TRUE(morphology(zt - 1e-4, -1.0).has_double_points());
  EXPECT_FALSE(morphology(zt + 1e-4, -1.0).has_double_points());
  EXPECT_EQ(morphology(zt, -1.0).drift_sign(), 1);
  // Above z_tangent: embedded.
  const auto m5 = morphology(0.5 * (zt + hi), -1.0);
  EXPECT_FALSE(m5.has_double_points());
  EXPECT_EQ(m5.drift_sign(), 1);
}

TEST(Polyline, CrossingOfTwoSegments) {
  std::vector<ProfileState> pts{{0, 0, 0, 0}, {1, 1, 1, 0}, {2, 1, 0, 0}, {3, 0, 1, 0}};
  const auto c = polyline_crossings(pts);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].x, 0.5, 1e-15);
  EXPECT_NEAR(c[0].z, 0.5, 1e-15);
}

// Property: graph regime never turns vertical and stays out of r u <= 1/kappa
// on its initial arc; the sessile inclination increases strictly.
TEST(Property, RegimeInvariants) {
  oracle::Gen gen(21);
  for (int i = 0; i < 15; ++i) {
    const double kappa = -gen.log_uniform(0.2, 5.0);
    const double z0 = -gen.uniform(0.02, 0.98) * std::sqrt(2.0 / -kappa);
    ASSERT_EQ(classify(z0, kappa).tag, RegimeTag::PendentGraph);
    const Profile p = integrate(z0, kappa, 20.0 * capillary_length(kappa));
    double cmin = 1.0;
    for (const auto& st : p.samples()) cmin = std::min(cmin, std::cos(st.theta));
    EXPECT_GE(cmin, 1.0 + kappa * z0 * z0 / 2.0 - 1e-9);
    const Profile first = integrate_to_first_zero(z0, kappa);
    for (const auto& st : first.samples()) {
      if (st.s > 0.0) {
        EXPECT_GT(st.x * st.z, 1.0 / kappa);
      }
    }
  }
  for (int i = 0; i < 10; ++i) {
    const double kappa = gen.log_uniform(0.1, 10.0), z0 = gen.uniform(0.05, 3.0);
    const Profile p = integrate(z0, kappa, 30.0);
    const auto& s = p.samples();
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_GT(s[k].theta, s[k - 1].theta);
  }
}

}  // namespace
