// Copyright 2026 The diffcal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "test_support.hpp"

namespace diffcal::control {
namespace {

using calib::CalibrationRecord;
using calib::PidGains;

constexpr double kIdealGain = 0.02;  // (rad/s) / us at the wheel

// A plant with no dead zone, symmetric servos, no friction loss, no loop
// delay and a perfect gyro.
RobotSpec ideal_spec() {
  RobotSpec spec = testing::quiet_spec();
  for (auto* s : {&spec.servo_left, &spec.servo_right}) {
    s->deadzone_halfwidth_fwd = 0.0;
    s->deadzone_halfwidth_back = 0.0;
    s->gain_fwd = kIdealGain;
    s->gain_back = kIdealGain;
  }
  spec.surface = {1.0, 1.0, "ideal"};
  spec.actuation_delay_ticks = 0;
  return spec;
}

// The calibration record of ideal_spec(), written down analytically.
CalibrationRecord ideal_record() {
  const RobotSpec spec = ideal_spec();
  const double k = spec.geometry.coupling_left * kIdealGain;
  CalibrationRecord r;
  r.motors.left_fwd = calib::fit_motor_map(1500.0, 1650.0, k * 150.0);
  r.motors.right_fwd = r.motors.left_fwd;
  r.motors.left_back = calib::fit_motor_map(1500.0, 1350.0, -k * 150.0);
  r.motors.right_back = r.motors.left_back;
  r.pid = {6.0, 3.0, 0.1, 9.0, 0.3};
  r.velocity.slope_fwd = spec.geometry.wheel_separation;
  r.velocity.slope_back = spec.geometry.wheel_separation;
  r.velocity.max_command = k * 150.0;
  return r;
}

const CalibrationRecord& default_record() {
  static const CalibrationRecord r = testing::calibrate_spec(RobotSpec{}).record;
  return r;
}

std::unique_ptr<Robot> open_field(const RobotSpec& spec, double yaw = 0.0) {
  return std::make_unique<Robot>(spec, plant::Arena::rectangle(400, 400),
                                 plant::PlantState{200, 200, yaw, 0.0, false});
}

TEST(PidStep, Examples) {
  PidState s;
  const PidGains zero{1.0, 0.5, 0.1, 0, 0};
  EXPECT_EQ(pid_step(zero, s, 0.3, 0.3, 0.0, 10.0), 0.0);
  PidState p;
  EXPECT_NEAR(pid_step({2.0, 0.0, 0.0, 0, 0}, p, 0.3, 0.0, 0.0, 10.0), 0.6, 1e-15);
}

TEST(PidStep, ErrorWrapsAcrossPi) {
  PidState s;
  const double out = pid_step({1.0, 0.0, 0.0, 0, 0}, s, kPi, deg_to_rad(-179.0), 0.0, 10.0);
  EXPECT_NEAR(out, deg_to_rad(-1.0), 1e-12);
}

TEST(PidStep, RejectsNonIncreasingTime) {
  PidState s;
  const PidGains g{1.0, 1.0, 0.0, 0, 0};
  pid_step(g, s, 0.1, 0.0, 1.0, 10.0);
  EXPECT_THROW(pid_step(g, s, 0.1, 0.0, 1.0, 10.0), DomainError);
  EXPECT_THROW(pid_step(g, s, 0.1, 0.0, 0.5, 10.0), DomainError);
}

TEST(PidStep, ClampsOutput) {
  PidState s;
  EXPECT_EQ(pid_step({100.0, 0.0, 0.0, 0, 0}, s, 1.0, 0.0, 0.0, 1.5), 1.5);
  PidState t;
  EXPECT_EQ(pid_step({100.0, 0.0, 0.0, 0, 0}, t, -1.0, 0.0, 0.0, 1.5), -1.5);
}

TEST(PidStep, LinearInErrorHistoryBelowClamp) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> e(-0.4, 0.4);
  const PidGains g{3.0, 1.7, 0.2, 0, 0};
  PidState a, b;
  for (int i = 0; i < 500; ++i) {
    const double err = e(rng);
    const double t = 0.02 * i;
    const double oa = pid_step_error(g, a, err, t, 1e9);
    const double ob = pid_step_error(g, b, 2.0 * err, t, 1e9);
    ASSERT_NEAR(ob, 2.0 * oa, 1e-9 * std::max(1.0, std::abs(oa)));
  }
}

TEST(PidStep, IntegralStaysWithinAntiWindupBound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> e(-1.0, 1.5);
  const PidGains g{2.0, 4.0, 0.05, 0, 0};
  const double max_output = 1.2;
  PidState s;
  for (int i = 0; i < 5000; ++i) {
    pid_step_error(g, s, e(rng), 0.02 * i, max_output);
    ASSERT_LE(std::abs(g.ki * s.integral_term), max_output + 1e-12);
  }
}

TEST(PidStep, IntegralFreezesWhileSaturatedTowardsError) {
  const PidGains g{10.0, 1.0, 0.0, 0, 0};
  PidState s;
  for (int i = 0; i < 100; ++i) pid_step_error(g, s, 0.5, 0.02 * i, 1.0);
  EXPECT_EQ(s.integral_term, 0.0);
}

TEST(ErrorUnwrapper, FollowsContinuously) {
  ErrorUnwrapper u;
  EXPECT_NEAR(u(kPi - 0.01), kPi - 0.01, 1e-15);
  EXPECT_NEAR(u(-kPi + 0.01), kPi + 0.01, 1e-12);
  EXPECT_NEAR(u(-kPi + 0.5), kPi + 0.5, 1e-12);
}

TEST(RatesToPwm, ZeroCommandIsNeutral) {
  const WheelPwm p = rates_to_pwm(ideal_record(), 0.0, 0.0);
  EXPECT_EQ(p.left, plant::kPwmNeutral);
  EXPECT_EQ(p.right, plant::kPwmNeutral);
}

TEST(RatesToPwm, SplitsRotationAndTranslation) {
  const CalibrationRecord r = ideal_record();
  const auto [rl, rr] = split_command(r.velocity, 0.0, 0.8);
  EXPECT_DOUBLE_EQ(rl, 0.4);
  EXPECT_DOUBLE_EQ(rr, 0.4);
  const auto [tl, tr] = split_command(r.velocity, 5.0, 0.0);
  EXPECT_DOUBLE_EQ(tl, -tr);
  EXPECT_NEAR(tl, 0.5, 1e-12);
}

TEST(RatesToPwm, ReproducedByIdealPlant) {
  const CalibrationRecord r = ideal_record();
  const plant::DiffDrivePlant p(ideal_spec().geometry, ideal_spec().servo_left,
                                ideal_spec().servo_right, ideal_spec().surface,
                                plant::Arena::rectangle(100, 100));
  // Every combination stays inside the 0.9 rad/s linear region per motor.
  for (double v : {-6.0, -2.0, 0.0, 3.0, 6.0}) {
    for (double w : {-0.5, 0.0, 0.25, 0.5}) {
      const WheelPwm pwm = rates_to_pwm(r, v, w);
      const plant::BodyRates b = p.twist(pwm.left, pwm.right);
      EXPECT_NEAR(b.v, v, 1e-9);
      EXPECT_NEAR(b.omega, w, 1e-9);
    }
  }
}

TEST(RatesToPwm, ReportsSaturation) {
  const CalibrationRecord r = ideal_record();
  try {
    rates_to_pwm(r, 20.0, 0.0);
    FAIL() << "expected saturation";
  } catch (const SaturationError& e) {
    EXPECT_NEAR(e.feasible(), r.motors.left_fwd.rate_at_max, 1e-12);
    EXPECT_GT(e.requested(), e.feasible());
  }
}

TEST(MotionController, RejectsIncompleteCalibrationAndBadCommands) {
  auto robot = open_field(ideal_spec());
  EXPECT_THROW(MotionController(*robot, CalibrationRecord{}), DomainError);
  MotionController mc(*robot, ideal_record());
  EXPECT_THROW(mc.drive_distance(0.0, 5.0), DomainError);
  EXPECT_THROW(mc.drive_distance(10.0, 0.0), DomainError);
  EXPECT_THROW(mc.drive_distance(10.0, 100.0), DomainError);
}

TEST(DriveDistance, IdealPlantTravelsExactly) {
  auto robot = open_field(ideal_spec());
  MotionController mc(*robot, ideal_record());
  const Vec2 p0 = robot->truth().position();
  const MotionReport rep = mc.drive_distance(30.0, 5.0);
  EXPECT_TRUE(rep.completed);
  // 6 s of travel, then the heading hold at the end of the segment.
  EXPECT_NEAR(rep.duration, 6.0 + MotionConfig{}.settle_hold, 0.05);
  EXPECT_NEAR((robot->truth().position() - p0).norm(), 30.0, 1e-6);
  EXPECT_NEAR(robot->truth().y, 200.0, 1e-9);
}

TEST(DriveDistance, StopsWithinOneStep) {
  auto robot = open_field(ideal_spec());
  MotionController mc(*robot, ideal_record());
  for (double d : {7.33, 12.0, 21.05}) {
    const double speed = 4.0;
    const MotionReport rep = mc.drive_distance(d, speed);
    EXPECT_LE(std::abs(rep.distance - d), speed * robot->dt() + 1e-9);
  }
}

TEST(DriveDistance, DefaultPlantWithinSixPercent) {
  for (double speed : {2.0, 4.0, 6.0}) {
    auto robot = open_field(RobotSpec{});
    MotionController mc(*robot, default_record());
    const Vec2 p0 = robot->truth().position();
    mc.drive_distance(30.0, speed);
    EXPECT_NEAR((robot->truth().position() - p0).norm(), 30.0, 0.06 * 30.0) << speed;
  }
}

TEST(DriveDistance, InterruptedByWall) {
  auto robot = std::make_unique<Robot>(ideal_spec(), plant::Arena::rectangle(100, 100),
                                       plant::PlantState{90, 50, 0.0, 0.0, false});
  MotionController mc(*robot, ideal_record());
  const MotionReport rep = mc.drive_distance(30.0, 5.0);
  EXPECT_TRUE(rep.interrupted);
  EXPECT_FALSE(rep.completed);
  EXPECT_LT(rep.distance, 30.0);
  EXPECT_NEAR(robot->truth().x, 100.0, 1e-9);
}

TEST(DriveArc, DegenerateArcIsStraightLine) {
  auto a = open_field(RobotSpec{}, 0.4);
  auto b = open_field(RobotSpec{}, 0.4);
  MotionController ma(*a, default_record());
  MotionController mb(*b, default_record());
  ma.drive_distance(25.0, 5.0);
  mb.drive_arc(25.0, b->gyro_yaw(), b->gyro_yaw(), 5.0);
  EXPECT_EQ(a->truth().x, b->truth().x);
  EXPECT_EQ(a->truth().y, b->truth().y);
  EXPECT_EQ(a->truth().yaw, b->truth().yaw);
}

TEST(DriveArc, IdealCircleClosesOnItself) {
  auto robot = open_field(ideal_spec());
  MotionController mc(*robot, ideal_record());
  const Vec2 p0 = robot->truth().position();
  double far = 0.0;
  const double y0 = robot->gyro_yaw();
  const double step = kPi * 30.0 / 8.0;
  for (int k = 0; k < 8; ++k) {
    mc.drive_arc(step, y0 + k * kPi / 4, y0 + (k + 1) * kPi / 4, 5.0);
    far = std::max(far, (robot->truth().position() - p0).norm());
  }
  EXPECT_NEAR(far, 30.0, 1.0);
  EXPECT_LT((robot->truth().position() - p0).norm(), 1.0);
}

TEST(DriveArc, FullTurnWithinDriftBudget) {
  auto robot = open_field(RobotSpec{});
  calib::settle_gyro(*robot);
  MotionController mc(*robot, default_record());
  const double truth0 = robot->truth().yaw;
  const double y0 = robot->gyro_yaw();
  const double t0 = robot->time();
  mc.drive_arc(kPi * 30.0, y0, y0 + kTwoPi, 5.0);
  const double budget = deg_to_rad(2.0) / 60.0 * (robot->time() - t0);
  EXPECT_LE(std::abs(robot->truth().yaw - truth0 - kTwoPi), budget);
}

// 45 degree step with fixed gains; returns the overshoot in degrees and the
// 4th to 1st peak ratio.
std::pair<double, double> step_response(Robot& robot, const CalibrationRecord& r,
                                        const PidGains& g) {
  const double target = robot.gyro_yaw() + deg_to_rad(45.0);
  PidState pid;
  std::vector<double> t, e;
  double overshoot = 0.0;
  for (int i = 0; i < robot.ticks_for(4.0); ++i) {
    yaw_hold_tick(robot, r.motors, g, pid, target, 0.0);
    t.push_back(robot.time());
    e.push_back(target - robot.gyro_yaw());
    overshoot = std::max(overshoot, -e.back());
  }
  robot.idle_ticks(20);
  return {rad_to_deg(overshoot), calib::sustain_ratio(calib::find_peaks(t, e, deg_to_rad(0.1)))};
}

TEST(RotateTo, TunedBeatsHighGainProportional) {
  std::unique_ptr<Robot> robot;
  const CalibrationRecord r = testing::calibrate_spec(RobotSpec{}, &robot).record;
  const auto [tuned_os, tuned_ratio] = step_response(*robot, r, r.pid);
  const auto [p_os, p_ratio] = step_response(*robot, r, {r.pid.ku / 1.5, 0, 0, 0, 0});
  EXPECT_LT(tuned_os, p_os);
  EXPECT_LT(tuned_os, 0.15 * 45.0);
  EXPECT_LT(tuned_ratio, 0.25);
}

TEST(RotateTo, SettlesAndReports) {
  std::unique_ptr<Robot> robot;
  const CalibrationRecord r = testing::calibrate_spec(RobotSpec{}, &robot).record;
  MotionController mc(*robot, r);
  const double target = robot->gyro_yaw() - deg_to_rad(90.0);
  const MotionReport rep = mc.rotate_to(target);
  EXPECT_TRUE(rep.completed);
  EXPECT_LT(std::abs(wrap_angle(target - robot->gyro_yaw())), deg_to_rad(1.0));
  EXPECT_LT(rep.overshoot, deg_to_rad(0.15 * 90.0));
  EXPECT_GT(rep.duration, rep.settle_time);
}

TEST(RotateTo, CurrentYawCompletesImmediately) {
  auto robot = open_field(ideal_spec());
  MotionController mc(*robot, ideal_record());
  const double t0 = robot->time();
  const MotionReport rep = mc.rotate_to(robot->gyro_yaw());
  EXPECT_TRUE(rep.completed);
  EXPECT_EQ(robot->time(), t0);
}

TEST(RotateTo, HalfTurnDoesNotChatter) {
  std::unique_ptr<Robot> robot;
  const CalibrationRecord r = testing::calibrate_spec(RobotSpec{}, &robot).record;
  MotionController mc(*robot, r);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(mc.rotate_to(robot->gyro_yaw() + kPi).completed);
}

TEST(WallBounce, NewHeadingPointsAwayFromWall) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 n = heading_vector(angle(rng));
    const double h = sample_bounce_heading(n, rng);
    ASSERT_GE(heading_vector(h).dot(n), -1e-12);
  }
}

TEST(WallBounce, ClosedLoopNeedsCalibration) {
  auto robot = open_field(ideal_spec());
  EXPECT_THROW(WallBounceAgent(*robot, nullptr, {}, 1), DomainError);
  EXPECT_NO_THROW(WallBounceAgent(*robot, nullptr, {}, 1, DriveMode::kOpenLoop));
}

TEST(WallBounce, BouncesAndStaysInside) {
  auto robot = std::make_unique<Robot>(RobotSpec{}, plant::Arena::rectangle(120, 120),
                                       plant::PlantState{60, 60, 0.3, 0.0, false});
  const CalibrationRecord r = default_record();
  WallBounceAgent agent(*robot, &r, {}, 5);
  for (int i = 0; i < robot->ticks_for(120.0); ++i) {
    agent.step();
    ASSERT_TRUE(robot->arena().contains(robot->truth().position()));
  }
  EXPECT_GE(agent.bounces(), 3);
}

TEST(WallBounce, StopsInsideTarget) {
  auto robot = std::make_unique<Robot>(
      RobotSpec{}, plant::Arena::rectangle(200, 200, {{{100, 100}, 10}}),
      plant::PlantState{40, 100, 0.0, 0.0, false});
  const CalibrationRecord r = default_record();
  WallBounceAgent agent(*robot, &r, {}, 5);
  BounceAction last = BounceAction::kDrive;
  for (int i = 0; i < robot->ticks_for(30.0) && last != BounceAction::kFound; ++i) {
    last = agent.step();
  }
  EXPECT_EQ(last, BounceAction::kFound);
  EXPECT_EQ(agent.found_target(), 0);
  EXPECT_EQ(agent.step(), BounceAction::kIdle);
}

}  // namespace
}  // namespace diffcal::control
