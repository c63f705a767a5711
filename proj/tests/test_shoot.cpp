#include <gtest/gtest.h>

#include <cmath>

#include "capchan/capchan.hpp"
#include "oracle.hpp"

using namespace capchan;

namespace {

/// u0 of the plate problem from the angle quadrature: scan a uniform grid of
/// n points on (0, 1/(kappa a)) for the sign change of r(psi_w; u0) - a, then
/// interpolate linearly inside the cell.
double plate_u0_by_scan(double kappa, double a, double gamma, int n) {
  const double top = 1.0 / (kappa * a);
  double prev_u = top / n, prev_f = oracle::plate_wall_gap(prev_u, kappa, a, gamma);
  for (int i = 2; i < n; ++i) {
    const double u = top * i / n, f = oracle::plate_wall_gap(u, kappa, a, gamma);
    if ((prev_f > 0.0) != (f > 0.0)) return prev_u + (u - prev_u) * prev_f / (prev_f - f);
    prev_u = u;
    prev_f = f;
  }
  return std::nan("");
}

TEST(ShootAngle, LaplaceBracketAndFrozenValue) {
  const auto r = shoot_contact_angle(1.0, 1.0, 0.0);
  EXPECT_GT(r.u0, kPi / 4);
  EXPECT_LT(r.u0, 1.0);
  EXPECT_LE(r.residual, kShootTol);
  EXPECT_LE(r.lo, r.u0);
  EXPECT_GE(r.hi, r.u0);
  EXPECT_NEAR(r.u0, 0.823574244709805, 1e-9);
}

TEST(ShootAngle, AgreesWithMillionPointScan) {
  const double scan = plate_u0_by_scan(1.0, 1.0, 0.0, 1'000'000);
  EXPECT_NEAR(shoot_contact_angle(1.0, 1.0, 0.0).u0, scan, 1e-7);
}

TEST(ShootAngle, ResidualReverifiedByFreshIntegration) {
  for (double gamma : {0.0, 0.4, 1.2}) {
    const auto r = shoot_contact_angle(2.0, 0.7, gamma);
    IntegratorOptions tight;
    tight.rel_tol = 1e-12;
    tight.abs_tol = 1e-14;
    EXPECT_LE(std::abs(contact_angle_residual(r.u0, 2.0, 0.7, gamma, tight)), 1e-9);
    EXPECT_NEAR(r.u0, plate_u0_by_scan(2.0, 0.7, gamma, 20000), 1e-8);
  }
}

TEST(ShootAngle, DomainErrors) {
  EXPECT_THROW(shoot_contact_angle(-1.0, 1.0, 0.0), Error);
  EXPECT_THROW(shoot_contact_angle(1.0, 0.0, 0.0), Error);
  EXPECT_THROW(shoot_contact_angle(1.0, 1.0, kPi / 2), Error);
}

TEST(ShootAngle, FlatLimitAndCapillaryFall) {
  EXPECT_EQ(shoot_contact_angle_any(1.0, 1.0, kPi / 2).u0, 0.0);
  const auto up = shoot_contact_angle_any(1.0, 1.0, 0.3);
  const auto down = shoot_contact_angle_any(1.0, 1.0, kPi - 0.3);
  EXPECT_EQ(down.u0, -up.u0);
  EXPECT_LT(down.lo, down.hi);
  // Residual at u0 -> 0 is -cos(gamma).
  EXPECT_NEAR(contact_angle_residual(1e-12, 1.0, 1.0, 1.4), -std::cos(1.4), 1e-9);
}

TEST(ShootAngle, BracketValidity) {
  // kappa u0 < sin(psi)/r < kappa u on (0, a] for sampled u0.
  oracle::Gen gen(31);
  for (int i = 0; i < 8; ++i) {
    const double kappa = gen.log_uniform(0.2, 5.0), a = gen.log_uniform(0.3, 2.0);
    // Below the gamma = 0 root the profile reaches the wall before turning vertical.
    const double u0 = gen.uniform(0.05, 0.95) * shoot_contact_angle(kappa, a, 0.0).u0;
    const Profile p = integrate_to_wall(u0, kappa, a);
    ASSERT_EQ(p.stop_index(), std::size_t{0});
    const GraphView g(p, p.back().s);
    for (int k = 1; k <= 50; ++k) {
      const auto st = k < 50 ? g.at_x(a * k / 50.0) : p.back();
      const double q = std::sin(st.theta) / st.x;
      EXPECT_LT(kappa * u0, q);
      EXPECT_LT(q, kappa * st.z);
    }
  }
}

TEST(Volume, QuadratureAndBounds) {
  const double u0 = 0.5, kappa = 1.0;
  const double v = volume_at_angle(u0, kappa, kPi / 2);
  const Profile p = integrate_to_angle(u0, kappa, kPi / 2);
  EXPECT_NEAR(v, volume_by_quadrature(p), 1e-8);
  // Trapezoid in s on a fine resampling.
  const int n = 200000;
  const double S = p.back().s;
  double area = 0.0;
  for (int i = 0; i <= n; ++i) {
    const auto st = p.at(S * i / n);
    area += (i == 0 || i == n ? 0.5 : 1.0) * st.z * std::cos(st.theta);
  }
  area *= S / n;
  EXPECT_NEAR(v, 2.0 * (p.back().x * p.back().z - area), 1e-8);
  const double R = p.back().x;
  EXPECT_LT(R, 1.0 / (kappa * u0));
  EXPECT_LT(v, kPi * R * R);
  EXPECT_LT(volume_at_angle(u0, kappa, 1e-4), 1e-9);
}

TEST(Volume, MonotoneInU0) {
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 10; ++i) {
    const double v = volume_at_angle(0.1 * i, 1.0, kPi / 2);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(ShootVolume, RoundTripAndLimits) {
  const double v = volume_at_angle(0.5, 1.0, 3 * kPi / 4);
  EXPECT_NEAR(shoot_volume(1.0, 3 * kPi / 4, v).u0, 0.5, 1e-7);
  EXPECT_GT(shoot_volume(1.0, kPi / 2, 1e-6).u0, shoot_volume(1.0, kPi / 2, 1e-3).u0);
  EXPECT_THROW(shoot_volume(1.0, 0.0, 1.0), Error);
  EXPECT_THROW(shoot_volume(1.0, 1.0, -1.0), Error);
}

TEST(Extent, ClosedFormsAndOrdering) {
  const auto g = channel_extent(1.0, 2.0, kPi / 2);
  EXPECT_NEAR(g.u_vertical, std::sqrt(2.0), 1e-8);
  EXPECT_LE(g.height_residual, 1e-8);
  const auto h = channel_extent(0.5, 1.0, 2.0);
  EXPECT_GT(h.r_o, 0.0);
  EXPECT_LT(h.r_o, h.R_vertical);
  EXPECT_LT(h.R_vertical - h.r_o, std::sqrt(2.0));
  EXPECT_NEAR(h.r_gamma, oracle::sessile_r(0.5, 1.0, 2.0), 1e-9);
  EXPECT_NEAR(h.R_vertical, oracle::sessile_r(0.5, 1.0, kPi / 2), 1e-9);
  // The angle quadrature is regular at pi: r_o = r(pi).
  EXPECT_NEAR(h.r_o, oracle::sessile_r(0.5, 1.0, kPi), 1e-8);
}

TEST(Extent, ContinuesThroughEveryAngle) {
  IntegratorOptions o;
  o.events = EventSet::none();
  for (int k = 1; k < 20; ++k) o.angle_targets.push_back(kPi * k / 20.0);
  const Profile p = integrate_to_angle(0.3, 3.0, kPi + 0.01, o);
  for (int k = 1; k < 20; ++k) EXPECT_TRUE(p.first_at_level(EventKind::AngleHit, kPi * k / 20.0));
}

TEST(FirstZeroPendent, Examples) {
  for (double u0 : {-1.0, -0.1}) {
    const double R = pendent_first_zero(u0, -1.0);
    EXPECT_GT(R, 1.0 / std::sqrt(2.0));
    EXPECT_LT(R, std::sqrt(2.0 * std::exp(1.0)));
    EXPECT_NEAR(R, oracle::pendent_R(u0, -1.0), 1e-9);
  }
  IntegratorOptions tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  EXPECT_NEAR(pendent_first_zero(-1.0, -1.0), pendent_first_zero(-1.0, -1.0, tight), 1e-8);
  EXPECT_NEAR(pendent_first_zero(-1.0, -1.0), 1.24917406386576, 1e-9);
  // Quarter-period relation: x(4 s0) = 4 R.
  EXPECT_NEAR(period(-1.0, -1.0).translation, 4.0 * pendent_first_zero(-1.0, -1.0), 1e-8);
  EXPECT_THROW(pendent_first_zero(-1.5, -1.0), Error);
  EXPECT_NO_THROW(pendent_first_zero(-std::sqrt(2.0), -1.0));
}

TEST(Inclusion, LoweredSmallerChannelLiesAbove) {
  oracle::Gen gen(41);
  for (int i = 0; i < 6; ++i) {
    const double kappa = gen.log_uniform(0.2, 5.0), gamma = gen.uniform(0.05, kPi / 2);
    const double u0 = gen.log_uniform(0.2, 2.0), delta = gen.log_uniform(0.01, 1.0);
    const auto r = inclusion_check(u0, kappa, gamma, delta);
    EXPECT_GE(r.min_gap, -1e-8);
    EXPECT_LT(r.gamma_gap, 0.0);
  }
}

}  // namespace
