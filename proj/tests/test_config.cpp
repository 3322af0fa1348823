#include <gtest/gtest.h>

#include <string>

#include "pfmpc/config.hpp"

namespace {

using pfmpc::Config;

void expect_equals_defaults(const Config& c) {
  const Config d;
  // vehicle
  EXPECT_DOUBLE_EQ(c.vehicle.mass, d.vehicle.mass);
  EXPECT_DOUBLE_EQ(c.vehicle.lf, d.vehicle.lf);
  EXPECT_DOUBLE_EQ(c.vehicle.lr, d.vehicle.lr);
  EXPECT_DOUBLE_EQ(c.vehicle.kf, d.vehicle.kf);
  EXPECT_DOUBLE_EQ(c.vehicle.kr, d.vehicle.kr);
  EXPECT_DOUBLE_EQ(c.vehicle.iz, d.vehicle.iz);
  EXPECT_DOUBLE_EQ(c.vehicle.dt, d.vehicle.dt);
  EXPECT_DOUBLE_EQ(c.vehicle.width, d.vehicle.width);
  EXPECT_DOUBLE_EQ(c.vehicle.length, d.vehicle.length);
  EXPECT_DOUBLE_EQ(c.vehicle.vx_blend_low, d.vehicle.vx_blend_low);
  EXPECT_DOUBLE_EQ(c.vehicle.vx_blend_high, d.vehicle.vx_blend_high);
  EXPECT_DOUBLE_EQ(c.vehicle.u_min.accel, d.vehicle.u_min.accel);
  EXPECT_DOUBLE_EQ(c.vehicle.u_min.steer, d.vehicle.u_min.steer);
  EXPECT_DOUBLE_EQ(c.vehicle.u_max.accel, d.vehicle.u_max.accel);
  EXPECT_DOUBLE_EQ(c.vehicle.u_max.steer, d.vehicle.u_max.steer);
  for (int i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(c.vehicle.x_min[i], d.vehicle.x_min[i]) << "x_min " << i;
    EXPECT_DOUBLE_EQ(c.vehicle.x_max[i], d.vehicle.x_max[i]) << "x_max " << i;
  }
  // pf
  EXPECT_DOUBLE_EQ(c.pf.k_base, d.pf.k_base);
  EXPECT_DOUBLE_EQ(c.pf.k_c, d.pf.k_c);
  EXPECT_DOUBLE_EQ(c.pf.scale_vehicle, d.pf.scale_vehicle);
  EXPECT_DOUBLE_EQ(c.pf.scale_cyclist, d.pf.scale_cyclist);
  EXPECT_DOUBLE_EQ(c.pf.scale_pedestrian, d.pf.scale_pedestrian);
  EXPECT_DOUBLE_EQ(c.pf.scale_static, d.pf.scale_static);
  EXPECT_DOUBLE_EQ(c.pf.d_epsilon, d.pf.d_epsilon);
  EXPECT_DOUBLE_EQ(c.pf.nd2_floor, d.pf.nd2_floor);
  EXPECT_DOUBLE_EQ(c.pf.axis_len_scale, d.pf.axis_len_scale);
  EXPECT_DOUBLE_EQ(c.pf.axis_wid_scale, d.pf.axis_wid_scale);
  EXPECT_DOUBLE_EQ(c.pf.corridor_extra, d.pf.corridor_extra);
  EXPECT_EQ(c.pf.printed_rotation, d.pf.printed_rotation);
  EXPECT_EQ(c.pf.propagate_obstacles, d.pf.propagate_obstacles);
  // mpc
  EXPECT_EQ(c.mpc.horizon, d.mpc.horizon);
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(c.mpc.w_x[i], d.mpc.w_x[i]) << "w_x " << i;
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(c.mpc.w_du[i], d.mpc.w_du[i]) << "w_du " << i;
    EXPECT_DOUBLE_EQ(c.mpc.w_u[i], d.mpc.w_u[i]) << "w_u " << i;
  }
  EXPECT_EQ(c.mpc.max_iters, d.mpc.max_iters);
  EXPECT_DOUBLE_EQ(c.mpc.step_tolerance, d.mpc.step_tolerance);
  EXPECT_DOUBLE_EQ(c.mpc.cost_tolerance, d.mpc.cost_tolerance);
  EXPECT_DOUBLE_EQ(c.mpc.ls_alpha0, d.mpc.ls_alpha0);
  EXPECT_DOUBLE_EQ(c.mpc.ls_beta, d.mpc.ls_beta);
  EXPECT_EQ(c.mpc.ls_max_backtracks, d.mpc.ls_max_backtracks);
  EXPECT_DOUBLE_EQ(c.mpc.armijo_c, d.mpc.armijo_c);
  EXPECT_DOUBLE_EQ(c.mpc.state_penalty, d.mpc.state_penalty);
  EXPECT_DOUBLE_EQ(c.mpc.target_speed, d.mpc.target_speed);
  // gates
  EXPECT_DOUBLE_EQ(c.gates.red_threshold, d.gates.red_threshold);
  EXPECT_DOUBLE_EQ(c.gates.junction_threshold, d.gates.junction_threshold);
  EXPECT_DOUBLE_EQ(c.gates.junction_slow_factor, d.gates.junction_slow_factor);
  // baseline
  EXPECT_DOUBLE_EQ(c.baseline.kp, d.baseline.kp);
  EXPECT_DOUBLE_EQ(c.baseline.ki, d.baseline.ki);
  EXPECT_DOUBLE_EQ(c.baseline.kd, d.baseline.kd);
  EXPECT_DOUBLE_EQ(c.baseline.integral_limit, d.baseline.integral_limit);
  EXPECT_DOUBLE_EQ(c.baseline.lookahead_gain, d.baseline.lookahead_gain);
  EXPECT_DOUBLE_EQ(c.baseline.lookahead_min, d.baseline.lookahead_min);
  EXPECT_DOUBLE_EQ(c.baseline.lookahead_max, d.baseline.lookahead_max);
  EXPECT_DOUBLE_EQ(c.baseline.stop_distance, d.baseline.stop_distance);
  EXPECT_DOUBLE_EQ(c.baseline.target_speed, d.baseline.target_speed);
  // infractions
  EXPECT_DOUBLE_EQ(c.infractions.pedestrian, d.infractions.pedestrian);
  EXPECT_DOUBLE_EQ(c.infractions.vehicle, d.infractions.vehicle);
  EXPECT_DOUBLE_EQ(c.infractions.cyclist, d.infractions.cyclist);
  EXPECT_DOUBLE_EQ(c.infractions.static_object, d.infractions.static_object);
  EXPECT_DOUBLE_EQ(c.infractions.red_light, d.infractions.red_light);
  // sim
  EXPECT_DOUBLE_EQ(c.sim.deadlock_speed, d.sim.deadlock_speed);
  EXPECT_DOUBLE_EQ(c.sim.deadlock_time, d.sim.deadlock_time);
}

TEST(Config, EmptyTextYieldsDefaults) {
  expect_equals_defaults(pfmpc::parse_config(""));
}

TEST(Config, ShippedDefaultFileMatchesBuiltinDefaults) {
  const Config c = pfmpc::load_config(std::string(PFMPC_SOURCE_DIR) + "/config/default.ini");
  expect_equals_defaults(c);
}

TEST(Config, OverridesApplyAcrossSections) {
  const char* text = R"(
[vehicle]
mass = 2000
u_min = -5, -0.5

[pf]
k_base = 75
printed_rotation = false

[mpc]
horizon = 12
w_x = 1, 2, 3, 4, 5, 6
target_speed = 6

[gates]
red_threshold = 0.7

[sim]
baseline_kp = 2.0
deadlock_time = 12

[infractions]
pedestrian = 0.45
)";
  const Config c = pfmpc::parse_config(text);
  EXPECT_DOUBLE_EQ(c.vehicle.mass, 2000.0);
  EXPECT_DOUBLE_EQ(c.vehicle.u_min.accel, -5.0);
  EXPECT_DOUBLE_EQ(c.vehicle.u_min.steer, -0.5);
  EXPECT_DOUBLE_EQ(c.pf.k_base, 75.0);
  EXPECT_FALSE(c.pf.printed_rotation);
  EXPECT_EQ(c.mpc.horizon, 12);
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(c.mpc.w_x[i], double(i + 1));
  EXPECT_DOUBLE_EQ(c.gates.red_threshold, 0.7);
  EXPECT_DOUBLE_EQ(c.baseline.kp, 2.0);
  EXPECT_DOUBLE_EQ(c.sim.deadlock_time, 12.0);
  EXPECT_DOUBLE_EQ(c.infractions.pedestrian, 0.45);
  // a single cruise target drives both controller variants
  EXPECT_DOUBLE_EQ(c.mpc.target_speed, 6.0);
  EXPECT_DOUBLE_EQ(c.baseline.target_speed, 6.0);
}

TEST(Config, CommentsAndWhitespaceTolerated) {
  const char* text =
      "# leading comment\n"
      "; alt comment\n"
      "  [vehicle]  \n"
      "  mass = 1900  # trailing comment\n";
  const Config c = pfmpc::parse_config(text);
  EXPECT_DOUBLE_EQ(c.vehicle.mass, 1900.0);
}

TEST(Config, UnknownSectionRejected) {
  EXPECT_THROW(pfmpc::parse_config("[rocket]\nthrust = 5\n"), std::runtime_error);
}

TEST(Config, UnknownKeyRejected) {
  try {
    pfmpc::parse_config("[vehicle]\nwarp_factor = 9\n");
    FAIL() << "expected throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("warp_factor"), std::string::npos);
  }
}

TEST(Config, MalformedLineNamesLineNumber) {
  try {
    pfmpc::parse_config("[vehicle]\nmass 1900\n");
    FAIL() << "expected throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(pfmpc::parse_config("[vehicle]\nmass = heavy\n"), std::runtime_error);
  EXPECT_THROW(pfmpc::parse_config("[mpc]\nhorizon = 2.5\n"), std::runtime_error);
  EXPECT_THROW(pfmpc::parse_config("[pf]\npropagate_obstacles = maybe\n"), std::runtime_error);
  EXPECT_THROW(pfmpc::parse_config("[vehicle]\nu_min = -5\n"), std::runtime_error);
  EXPECT_THROW(pfmpc::parse_config("[mpc]\nw_x = 1, 2, 3\n"), std::runtime_error);
}

TEST(Config, StructValidationPropagates) {
  EXPECT_THROW(pfmpc::parse_config("[mpc]\nhorizon = 1\n"), std::invalid_argument);
  EXPECT_THROW(pfmpc::parse_config("[vehicle]\nmass = -1\n"), std::invalid_argument);
  EXPECT_THROW(pfmpc::parse_config("[pf]\nscale_pedestrian = 0.5\n"), std::invalid_argument);
}

TEST(Config, MissingFileNamesPath) {
  try {
    pfmpc::load_config("/nonexistent/p.ini");
    FAIL() << "expected throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/p.ini"), std::string::npos);
  }
}

}  // namespace
