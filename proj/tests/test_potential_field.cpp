#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pfmpc/geometry.hpp"
#include "pfmpc/potential_field.hpp"

namespace {

using pfmpc::ObstacleClass;
using pfmpc::ObstacleDescriptor;
using pfmpc::PFGains;
using pfmpc::Vec2;

ObstacleDescriptor make_obstacle(double cx, double cy, double theta, double a, double b,
                                 ObstacleClass cls = ObstacleClass::vehicle) {
  ObstacleDescriptor o;
  o.cls = cls;
  o.cx = cx;
  o.cy = cy;
  o.theta = theta;
  o.half_len_a = a;
  o.half_wid_b = b;
  return o;
}

TEST(RotateIntoEllipse, ZeroThetaIsIdentityBothForms) {
  const ObstacleDescriptor o = make_obstacle(3.0, -2.0, 0.0, 2.0, 1.0);
  for (bool printed : {true, false}) {
    const Vec2 r = pfmpc::rotate_into_ellipse(7.5, 4.25, o, printed);
    EXPECT_DOUBLE_EQ(r.x(), 7.5);
    EXPECT_DOUBLE_EQ(r.y(), 4.25);
  }
}

TEST(RotateIntoEllipse, CenterMapsToCenterBothForms) {
  const ObstacleDescriptor o = make_obstacle(1.0, 2.0, 0.9, 2.0, 1.0);
  for (bool printed : {true, false}) {
    const Vec2 r = pfmpc::rotate_into_ellipse(1.0, 2.0, o, printed);
    EXPECT_DOUBLE_EQ(r.x(), 1.0);
    EXPECT_DOUBLE_EQ(r.y(), 2.0);
  }
}

TEST(RotateIntoEllipse, QuarterTurnPrintedForm) {
  // Componentwise form at theta = pi/2: x offset scaled by (cos+sin) = 1,
  // y offset scaled by (cos-sin) = -1. Ego (1,0) about origin stays (1,0).
  const ObstacleDescriptor o = make_obstacle(0.0, 0.0, M_PI / 2.0, 2.0, 1.0);
  const Vec2 printed = pfmpc::rotate_into_ellipse(1.0, 0.0, o, true);
  EXPECT_NEAR(printed.x(), 1.0, 1e-12);
  EXPECT_NEAR(printed.y(), 0.0, 1e-12);

  // Standard rigid rotation by -theta maps (1,0) to (0,-1).
  const Vec2 rigid = pfmpc::rotate_into_ellipse(1.0, 0.0, o, false);
  EXPECT_NEAR(rigid.x(), 0.0, 1e-12);
  EXPECT_NEAR(rigid.y(), -1.0, 1e-12);
}

TEST(ObstaclePotential, EmptyListIsZero) {
  const PFGains gains;
  bool capped = true;
  EXPECT_EQ(pfmpc::obstacle_potential(5.0, 5.0, {}, gains, 60.0, &capped), 0.0);
  EXPECT_FALSE(capped);
}

TEST(ObstaclePotential, BoundaryOfEllipseGivesGain) {
  // On the ellipse boundary the normalized distance squared is exactly 1,
  // so a single unit-scale obstacle contributes exactly the effective gain.
  const PFGains gains;
  const std::vector<ObstacleDescriptor> obs{make_obstacle(0.0, 0.0, 0.0, 2.0, 1.0)};
  EXPECT_DOUBLE_EQ(pfmpc::obstacle_potential(2.0, 0.0, obs, gains, 60.0), 60.0);
  EXPECT_DOUBLE_EQ(pfmpc::obstacle_potential(0.0, 1.0, obs, gains, 60.0), 60.0);
}

TEST(ObstaclePotential, TwoObstaclesSumTerms) {
  const PFGains gains;
  const std::vector<ObstacleDescriptor> obs{make_obstacle(0.0, 0.0, 0.0, 2.0, 1.0),
                                            make_obstacle(0.0, 0.0, 0.0, 2.0, 1.0)};
  // Ego at (4,0): nd^2 = (4/2)^2 = 4 for each copy -> 2 * 60/4.
  EXPECT_DOUBLE_EQ(pfmpc::obstacle_potential(4.0, 0.0, obs, gains, 60.0), 30.0);
}

TEST(ObstaclePotential, CapAtCenterAndFlagSet) {
  const PFGains gains;  // nd2_floor = 0.1
  const std::vector<ObstacleDescriptor> obs{make_obstacle(0.0, 0.0, 0.0, 2.0, 1.0)};
  bool capped = false;
  const double f = pfmpc::obstacle_potential(0.0, 0.0, obs, gains, 60.0, &capped);
  EXPECT_DOUBLE_EQ(f, 600.0);  // 10x the gain
  EXPECT_TRUE(capped);

  // Gradient is exactly zero on the flat capped plateau.
  const Vec2 g = pfmpc::obstacle_potential_gradient(0.0, 0.0, obs, gains, 60.0);
  EXPECT_EQ(g.x(), 0.0);
  EXPECT_EQ(g.y(), 0.0);
}

TEST(ObstaclePotential, CapBoundsEveryTerm) {
  PFGains gains;
  const double k_eff = 80.0;
  const std::vector<ObstacleDescriptor> obs{
      make_obstacle(1.0, 0.0, 0.3, 2.0, 1.0, ObstacleClass::pedestrian),
      make_obstacle(-1.0, 0.5, -0.7, 3.0, 1.5, ObstacleClass::cyclist),
      make_obstacle(0.0, -1.0, 1.2, 2.5, 2.0, ObstacleClass::vehicle)};
  const double bound =
      (gains.scale_pedestrian + gains.scale_cyclist + gains.scale_vehicle) * k_eff / gains.nd2_floor;
  for (double x = -4.0; x <= 4.0; x += 0.25)
    for (double y = -4.0; y <= 4.0; y += 0.25)
      EXPECT_LE(pfmpc::obstacle_potential(x, y, obs, gains, k_eff), bound + 1e-9);
}

TEST(ObstaclePotential, MonotoneAlongRayFromCenterBothForms) {
  PFGains gains;
  for (bool printed : {true, false}) {
    gains.printed_rotation = printed;
    const std::vector<ObstacleDescriptor> obs{make_obstacle(2.0, -1.0, 0.7, 2.0, 1.0)};
    const Vec2 dir = Vec2{0.6, 0.8};
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 0.05; t < 30.0; t += 0.05) {
      const Vec2 p = Vec2{2.0, -1.0} + t * dir;
      const double f = pfmpc::obstacle_potential(p.x(), p.y(), obs, gains, 60.0);
      EXPECT_LE(f, prev + 1e-12) << "form=" << printed << " t=" << t;
      prev = f;
    }
  }
}

TEST(ObstaclePotential, VanishesFarAway) {
  const PFGains gains;
  const std::vector<ObstacleDescriptor> obs{make_obstacle(0.0, 0.0, 0.4, 2.0, 1.0)};
  EXPECT_LT(pfmpc::obstacle_potential(1e4, 3.0, obs, gains, 60.0), 1e-4);
}

TEST(ObstaclePotential, ClassScalesMultiplyTerms) {
  const PFGains gains;
  const double base = pfmpc::obstacle_potential(
      4.0, 0.0, {make_obstacle(0, 0, 0, 2, 1, ObstacleClass::vehicle)}, gains, 60.0);
  const double cyc = pfmpc::obstacle_potential(
      4.0, 0.0, {make_obstacle(0, 0, 0, 2, 1, ObstacleClass::cyclist)}, gains, 60.0);
  const double ped = pfmpc::obstacle_potential(
      4.0, 0.0, {make_obstacle(0, 0, 0, 2, 1, ObstacleClass::pedestrian)}, gains, 60.0);
  const double stat = pfmpc::obstacle_potential(
      4.0, 0.0, {make_obstacle(0, 0, 0, 2, 1, ObstacleClass::static_object)}, gains, 60.0);
  EXPECT_DOUBLE_EQ(cyc, 2.0 * base);
  EXPECT_DOUBLE_EQ(ped, 3.0 * base);
  EXPECT_DOUBLE_EQ(stat, base);
}

TEST(ObstaclePotential, RigidRotationInvarianceStandardForm) {
  // Rotating the whole scene about the origin must not change the field value
  // when the standard rigid rotation form is used.
  PFGains gains;
  gains.printed_rotation = false;
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int trial = 0; trial < 200; ++trial) {
    const double beta = ang(rng);
    const double cb = std::cos(beta), sb = std::sin(beta);
    const Vec2 ego{pos(rng), pos(rng)};
    std::vector<ObstacleDescriptor> obs, obs_rot;
    for (int i = 0; i < 3; ++i) {
      ObstacleDescriptor o = make_obstacle(pos(rng), pos(rng), ang(rng), 3.0, 1.5);
      ObstacleDescriptor r = o;
      r.cx = cb * o.cx - sb * o.cy;
      r.cy = sb * o.cx + cb * o.cy;
      r.theta = o.theta + beta;
      obs.push_back(o);
      obs_rot.push_back(r);
    }
    const Vec2 ego_rot{cb * ego.x() - sb * ego.y(), sb * ego.x() + cb * ego.y()};
    const double f = pfmpc::obstacle_potential(ego.x(), ego.y(), obs, gains, 60.0);
    const double fr = pfmpc::obstacle_potential(ego_rot.x(), ego_rot.y(), obs_rot, gains, 60.0);
    EXPECT_NEAR(f, fr, 1e-9 * std::max(1.0, std::abs(f)));
  }
}

TEST(ObstaclePotential, PrintedFormIsFrameDependent) {
  // The componentwise form is anisotropic in the world frame: rotating the
  // scene changes its value. Documented here so the difference between the
  // two forms stays visible.
  PFGains gains;
  gains.printed_rotation = true;
  const double beta = M_PI / 4.0;
  const double cb = std::cos(beta), sb = std::sin(beta);
  double max_diff = 0.0;
  for (double ex : {3.0, 4.0, 5.0}) {
    const ObstacleDescriptor o = make_obstacle(0.0, 0.0, 0.0, 2.0, 1.0);
    ObstacleDescriptor r = o;
    r.theta = beta;
    const Vec2 ego{ex, 1.0};
    const Vec2 ego_rot{cb * ego.x() - sb * ego.y(), sb * ego.x() + cb * ego.y()};
    const double f = pfmpc::obstacle_potential(ego.x(), ego.y(), {o}, gains, 60.0);
    const double fr = pfmpc::obstacle_potential(ego_rot.x(), ego_rot.y(), {r}, gains, 60.0);
    max_diff = std::max(max_diff, std::abs(f - fr));
  }
  EXPECT_GT(max_diff, 1e-3);
}

TEST(ObstaclePotential, GradientMatchesFiniteDifferences) {
  PFGains gains;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pos(-8.0, 8.0);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  const double h = 1e-6;
  for (bool printed : {true, false}) {
    gains.printed_rotation = printed;
    int checked = 0;
    while (checked < 200) {
      const std::vector<ObstacleDescriptor> obs{
          make_obstacle(pos(rng), pos(rng), ang(rng), 2.5, 1.2, ObstacleClass::cyclist)};
      const double ex = pos(rng), ey = pos(rng);
      // Stay clear of the capped plateau where the gradient is defined as zero.
      if (pfmpc::detail::normalized_dist2(ex, ey, obs[0], printed) < gains.nd2_floor + 0.05)
        continue;
      const Vec2 g = pfmpc::obstacle_potential_gradient(ex, ey, obs, gains, 60.0);
      const double fx1 = pfmpc::obstacle_potential(ex + h, ey, obs, gains, 60.0);
      const double fx0 = pfmpc::obstacle_potential(ex - h, ey, obs, gains, 60.0);
      const double fy1 = pfmpc::obstacle_potential(ex, ey + h, obs, gains, 60.0);
      const double fy0 = pfmpc::obstacle_potential(ex, ey, obs, gains, 60.0);
      const double fy0b = pfmpc::obstacle_potential(ex, ey - h, obs, gains, 60.0);
      (void)fy0;
      const double gx_fd = (fx1 - fx0) / (2.0 * h);
      const double gy_fd = (fy1 - fy0b) / (2.0 * h);
      EXPECT_NEAR(g.x(), gx_fd, std::max(1e-5, 1e-4 * std::abs(gx_fd)));
      EXPECT_NEAR(g.y(), gy_fd, std::max(1e-5, 1e-4 * std::abs(gy_fd)));
      ++checked;
    }
  }
}

TEST(ObstaclePotential, GradientPushesAwayFromObstacle) {
  const PFGains gains;
  const std::vector<ObstacleDescriptor> obs{make_obstacle(0.0, 0.0, 0.0, 2.0, 1.0)};
  // Cost decreases with distance, so d(cost)/dx < 0 on the +x side.
  const Vec2 g = pfmpc::obstacle_potential_gradient(4.0, 0.0, obs, gains, 60.0);
  EXPECT_LT(g.x(), 0.0);
  EXPECT_NEAR(g.y(), 0.0, 1e-12);
}

TEST(ObstaclePotential, InvalidAxesThrow) {
  const PFGains gains;
  ObstacleDescriptor bad = make_obstacle(0, 0, 0, 1.0, 2.0);  // a < b
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(pfmpc::obstacle_potential(1, 1, {bad}, gains, 60.0), std::invalid_argument);
  ObstacleDescriptor zero = make_obstacle(0, 0, 0, 0.0, 0.0);
  EXPECT_THROW(zero.validate(), std::invalid_argument);
}

TEST(FrontObstacleCost, NoObstacleDisablesTerm) {
  const PFGains gains;
  EXPECT_EQ(pfmpc::front_obstacle_cost(3.0, 10.0, -1.0, gains), 0.0);
}

TEST(FrontObstacleCost, ZeroAccelIsZero) {
  const PFGains gains;
  EXPECT_EQ(pfmpc::front_obstacle_cost(0.0, 10.0, 5.0, gains), 0.0);
}

TEST(FrontObstacleCost, UnitExample) {
  PFGains gains;
  gains.k_c = 1.0;
  // 1 * 1 * 10 / (9.999 + 0.001) = 1.
  EXPECT_NEAR(pfmpc::front_obstacle_cost(1.0, 10.0, 9.999, gains), 1.0, 1e-12);
}

TEST(FrontObstacleCost, BilinearInAccelAndSpeed) {
  const PFGains gains;
  const double f = pfmpc::front_obstacle_cost(1.2, 7.0, 12.0, gains);
  EXPECT_NEAR(pfmpc::front_obstacle_cost(2.4, 7.0, 12.0, gains), 2.0 * f, 1e-12 * std::abs(f));
  EXPECT_NEAR(pfmpc::front_obstacle_cost(1.2, 14.0, 12.0, gains), 2.0 * f, 1e-12 * std::abs(f));
  EXPECT_NEAR(pfmpc::front_obstacle_cost(2.4, 14.0, 12.0, gains), 4.0 * f, 1e-11 * std::abs(f));
}

TEST(FrontObstacleCost, BrakingNearObstacleIsRewarded) {
  const PFGains gains;
  EXPECT_LT(pfmpc::front_obstacle_cost(-2.0, 10.0, 5.0, gains), 0.0);
}

TEST(EffectiveObstacleGain, AnchorValues) {
  EXPECT_DOUBLE_EQ(pfmpc::effective_obstacle_gain(60.0, 0.5), 60.0);
  EXPECT_DOUBLE_EQ(pfmpc::effective_obstacle_gain(60.0, 0.0), 120.0);
  EXPECT_DOUBLE_EQ(pfmpc::effective_obstacle_gain(60.0, 1.0), 40.0);
}

TEST(EffectiveObstacleGain, RoundTripIdentity) {
  for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.05) {
    const double g = pfmpc::effective_obstacle_gain(60.0, std::min(p, 1.0));
    EXPECT_NEAR(g * (std::min(p, 1.0) + 0.5), 60.0, 60.0 * 4.0 * 1e-16);
  }
}

TEST(EffectiveObstacleGain, RejectsOutOfRangeProbability) {
  EXPECT_THROW(pfmpc::effective_obstacle_gain(60.0, -0.01), std::invalid_argument);
  EXPECT_THROW(pfmpc::effective_obstacle_gain(60.0, 1.01), std::invalid_argument);
}

TEST(EllipseAxes, DefaultInflation) {
  const PFGains gains;
  const auto [a, b] = pfmpc::ellipse_axes_from_footprint(4.5, 1.9, gains);
  EXPECT_DOUBLE_EQ(a, 9.0);
  EXPECT_DOUBLE_EQ(b, 2.375);
}

TEST(PFGainsValidate, RejectsBadValues) {
  PFGains ok;
  EXPECT_NO_THROW(ok.validate());
  PFGains neg = ok;
  neg.k_base = -1.0;
  EXPECT_THROW(neg.validate(), std::invalid_argument);
  PFGains order = ok;
  order.scale_pedestrian = 1.0;
  order.scale_cyclist = 2.0;
  EXPECT_THROW(order.validate(), std::invalid_argument);
  PFGains floor0 = ok;
  floor0.nd2_floor = 0.0;
  EXPECT_THROW(floor0.validate(), std::invalid_argument);
}

TEST(SelectFrontObstacle, EmptyListGivesNothing) {
  const pfmpc::Polyline ref({{0.0, 0.0}, {50.0, 0.0}});
  pfmpc::VehicleState ego;
  EXPECT_FALSE(pfmpc::select_front_obstacle(ego, ref, {}, 2.5).has_value());
}

TEST(SelectFrontObstacle, OnPathAheadReturnsCenterDistance) {
  const pfmpc::Polyline ref({{0.0, 0.0}, {50.0, 0.0}});
  pfmpc::VehicleState ego;
  const auto d =
      pfmpc::select_front_obstacle(ego, ref, {make_obstacle(8.0, 0.0, 0.0, 2.0, 1.0)}, 2.5);
  ASSERT_TRUE(d.has_value());
  EXPECT_DOUBLE_EQ(*d, 8.0);
}

TEST(SelectFrontObstacle, OutsideCorridorIgnored) {
  const pfmpc::Polyline ref({{0.0, 0.0}, {50.0, 0.0}});
  pfmpc::VehicleState ego;
  EXPECT_FALSE(
      pfmpc::select_front_obstacle(ego, ref, {make_obstacle(8.0, 5.0, 0.0, 2.0, 1.0)}, 2.5)
          .has_value());
  // Exactly on the corridor edge still counts.
  const auto edge =
      pfmpc::select_front_obstacle(ego, ref, {make_obstacle(8.0, 2.5, 0.0, 2.0, 1.0)}, 2.5);
  ASSERT_TRUE(edge.has_value());
  EXPECT_DOUBLE_EQ(*edge, std::hypot(8.0, 2.5));
}

TEST(SelectFrontObstacle, BehindEgoIgnored) {
  const pfmpc::Polyline ref({{0.0, 0.0}, {50.0, 0.0}});
  pfmpc::VehicleState ego;
  ego.px = 10.0;
  EXPECT_FALSE(
      pfmpc::select_front_obstacle(ego, ref, {make_obstacle(8.0, 0.0, 0.0, 2.0, 1.0)}, 2.5)
          .has_value());
}

TEST(SelectFrontObstacle, NearestOfSeveralWins) {
  const pfmpc::Polyline ref({{0.0, 0.0}, {50.0, 0.0}});
  pfmpc::VehicleState ego;
  const std::vector<ObstacleDescriptor> obs{make_obstacle(20.0, 0.5, 0.0, 2.0, 1.0),
                                            make_obstacle(12.0, -1.0, 0.0, 2.0, 1.0),
                                            make_obstacle(9.0, 4.0, 0.0, 2.0, 1.0)};
  const auto d = pfmpc::select_front_obstacle(ego, ref, obs, 2.5);
  ASSERT_TRUE(d.has_value());
  EXPECT_DOUBLE_EQ(*d, std::hypot(12.0, -1.0));
}

TEST(ObstacleClassNames, RoundTrip) {
  for (ObstacleClass c : {ObstacleClass::vehicle, ObstacleClass::cyclist,
                          ObstacleClass::pedestrian, ObstacleClass::static_object}) {
    EXPECT_EQ(pfmpc::obstacle_class_from_string(pfmpc::to_string(c)), c);
  }
  EXPECT_THROW(pfmpc::obstacle_class_from_string("drone"), std::invalid_argument);
}

}  // namespace
