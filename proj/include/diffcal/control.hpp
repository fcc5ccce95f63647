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

// Closed-loop yaw regulation and the distance-based motion primitives built
// on top of it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "diffcal/core.hpp"
#include "diffcal/records.hpp"
#include "diffcal/robot.hpp"
#include "diffcal/sensors.hpp"

namespace diffcal::control {

using calib::CalibrationRecord;
using calib::MotorCalibration;
using calib::PidGains;

class ControlError : public Error {
 public:
  using Error::Error;
};

/// A command outside the servos' linear region.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, double requested, double feasible)
      : Error(what), requested_(requested), feasible_(feasible) {}
  /// Largest magnitude of the offending per-motor contribution, rad/s.
  double requested() const { return requested_; }
  /// Linear-region ceiling of that motor and direction, rad/s.
  double feasible() const { return feasible_; }

 private:
  double requested_;
  double feasible_;
};

struct PidState {
  double integral_term = 0.0;   // rad*s
  double previous_error = 0.0;  // rad
  double previous_time = 0.0;   // s
  bool primed = false;
};

/// One PID update. The error is wrapped to (-pi, pi]; the integral is clamped
/// so its contribution never exceeds `max_output`, and it is frozen while the
/// output is saturated in the direction of the error; the output is clamped
/// to +-max_output. The first call after a reset has no derivative and does
/// not integrate.
inline double pid_step_error(const PidGains& gains, PidState& state, double error, double time,
                             double max_output) {
  if (state.primed && !(time > state.previous_time)) {
    throw DomainError("pid_step: time must increase");
  }
  double derivative = 0.0;
  if (state.primed) {
    const double dt = time - state.previous_time;
    derivative = (error - state.previous_error) / dt;
    double integral = state.integral_term + error * dt;
    if (gains.ki > 0) {
      const double bound = max_output / gains.ki;
      integral = std::clamp(integral, -bound, bound);
    }
    const double trial = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    const bool winding = std::abs(trial) > max_output && trial * error > 0;
    if (!winding) state.integral_term = integral;
  }
  state.previous_error = error;
  state.previous_time = time;
  state.primed = true;
  const double out = gains.kp * error + gains.ki * state.integral_term + gains.kd * derivative;
  return std::clamp(out, -max_output, max_output);
}

inline double pid_step(const PidGains& gains, PidState& state, double target_yaw,
                       double measured_yaw, double time, double max_output) {
  return pid_step_error(gains, state, wrap_angle(target_yaw - measured_yaw), time, max_output);
}

/// Follows a wrapped error continuously, so a turn towards a target near
/// +-pi keeps its direction instead of flipping with measurement noise.
struct ErrorUnwrapper {
  bool primed = false;
  double last = 0.0;

  double operator()(double wrapped) {
    double e = wrapped;
    if (primed) {
      while (e - last > kPi) e -= kTwoPi;
      while (e - last < -kPi) e += kTwoPi;
    }
    primed = true;
    last = e;
    return e;
  }
};

struct WheelPwm {
  double left = plant::kPwmNeutral;
  double right = plant::kPwmNeutral;
};

/// Inverts the motor fits for a pair of per-motor contributions. Contributions
/// beyond the measured linear region are extrapolated along the fitted line;
/// pulses are clamped to the physical range.
inline WheelPwm wheel_rates_to_pwm(const MotorCalibration& motors, double omega_l,
                                   double omega_r) {
  const auto one = [&](calib::Side side, double rate) {
    if (rate == 0.0) return plant::kPwmNeutral;
    const auto dir = rate > 0 ? calib::Direction::kForward : calib::Direction::kBackward;
    return std::clamp(motors.fit(side, dir).pwm_for(rate), plant::kPwmMin, plant::kPwmMax);
  };
  return {one(calib::Side::kLeft, omega_l), one(calib::Side::kRight, omega_r)};
}

/// Splits a body command into per-motor contributions: the straight part on
/// the omega_l = -omega_r locus and the turn shared equally.
inline std::pair<double, double> split_command(const calib::VelocityMap& velocity, double v_cmd,
                                               double omega_cmd) {
  const double straight = v_cmd == 0.0 ? 0.0 : velocity.command_for(v_cmd);
  return {straight + 0.5 * omega_cmd, -straight + 0.5 * omega_cmd};
}

/// Strict inversion of a body command (cm/s, rad/s) to pulses. Throws
/// SaturationError when a motor would leave its calibrated linear region.
inline WheelPwm rates_to_pwm(const CalibrationRecord& calib, double v_cmd, double omega_cmd) {
  const auto [wl, wr] = split_command(calib.velocity, v_cmd, omega_cmd);
  const auto check = [&](calib::Side side, double rate) {
    if (rate == 0.0) return;
    const auto dir = rate > 0 ? calib::Direction::kForward : calib::Direction::kBackward;
    const double ceiling = std::abs(calib.motors.fit(side, dir).rate_at_max);
    if (std::abs(rate) > ceiling * (1.0 + 1e-12)) {
      throw SaturationError(std::string("rates_to_pwm: ") + calib::to_string(side) +
                                " motor command exceeds its linear region",
                            std::abs(rate), ceiling);
    }
  };
  check(calib::Side::kLeft, wl);
  check(calib::Side::kRight, wr);
  return wheel_rates_to_pwm(calib.motors, wl, wr);
}

struct MotionConfig {
  double settle_tolerance = deg_to_rad(1.0);  // rad
  double settle_hold = 0.5;                   // s
  double rotate_timeout = 10.0;               // s
  double arc_end_tolerance = deg_to_rad(0.05);  // rad, final heading of an arc
  double arc_end_timeout = 3.0;               // s
};

struct MotionReport {
  bool completed = false;
  bool interrupted = false;  // wall contact
  double duration = 0.0;     // s
  double distance = 0.0;     // cm of commanded travel integrated
  double settle_time = 0.0;  // s, rotations only
  double overshoot = 0.0;    // rad past the target, rotations only
};

/// One control tick holding `target_yaw` with a PID while the motors run the
/// straight-motion command `straight` (per-motor contribution on the
/// omega_l = -omega_r locus). Returns the yaw-rate command issued.
inline double yaw_hold_tick(Robot& robot, const MotorCalibration& motors, const PidGains& gains,
                            PidState& pid, double target_yaw, double straight,
                            ErrorUnwrapper* unwrap = nullptr) {
  double error = wrap_angle(target_yaw - robot.gyro_yaw());
  if (unwrap != nullptr) error = (*unwrap)(error);
  const double omega =
      pid_step_error(gains, pid, error, robot.time(), motors.max_rotation_command());
  const WheelPwm pwm = wheel_rates_to_pwm(motors, straight + 0.5 * omega,
                                          -straight + 0.5 * omega);
  robot.tick(pwm.left, pwm.right);
  return omega;
}

/// In-place rotation to an absolute (gyro-frame) yaw; done once the error
/// stays inside the tolerance for the hold time. A target already within
/// tolerance completes immediately.
inline MotionReport rotate_in_place(Robot& robot, const MotorCalibration& motors,
                                    const PidGains& gains, double target_yaw,
                                    const MotionConfig& config = {}) {
  MotionReport report;
  const double t0 = robot.time();
  const double initial_error = wrap_angle(target_yaw - robot.gyro_yaw());
  if (std::abs(initial_error) < config.settle_tolerance) {
    report.completed = true;
    return report;
  }
  const double direction = initial_error > 0 ? 1.0 : -1.0;
  PidState pid;
  ErrorUnwrapper unwrap;
  robot.mark("rotate_start");
  double inside_since = -1.0;
  while (robot.time() - t0 < config.rotate_timeout) {
    yaw_hold_tick(robot, motors, gains, pid, target_yaw, 0.0, &unwrap);
    const double e = unwrap.last;
    report.overshoot = std::max(report.overshoot, -e * direction);
    if (std::abs(e) < config.settle_tolerance) {
      if (inside_since < 0) inside_since = robot.time();
      if (robot.time() - inside_since >= config.settle_hold - 1e-9) {
        report.completed = true;
        report.settle_time = inside_since - t0;
        break;
      }
    } else {
      inside_since = -1.0;
    }
  }
  report.duration = robot.time() - t0;
  robot.mark("rotate_end");
  if (!report.completed) throw ControlError("rotate_to: did not settle before timeout");
  return report;
}

/// Runs motion primitives on one robot using its calibration record. Owns the
/// robot's command stream while a primitive is executing.
class MotionController {
 public:
  MotionController(Robot& robot, CalibrationRecord calib, MotionConfig config = {})
      : robot_(robot), calib_(calib), config_(config) {
    if (!calib_.complete()) throw DomainError("MotionController: calibration incomplete");
  }

  const CalibrationRecord& calibration() const { return calib_; }
  double max_rotation_command() const { return calib_.motors.max_rotation_command(); }
  Robot& robot() { return robot_; }

  void reset_pid() { pid_ = {}; }
  const PidState& pid_state() const { return pid_; }

  /// One control tick holding `target_yaw` while commanding `v_cmd` cm/s.
  double control_tick(double target_yaw, double v_cmd, ErrorUnwrapper* unwrap = nullptr) {
    const double straight = v_cmd == 0.0 ? 0.0 : calib_.velocity.command_for(v_cmd);
    return yaw_hold_tick(robot_, calib_.motors, calib_.pid, pid_, target_yaw, straight, unwrap);
  }

  void hold_still(double seconds) { robot_.idle_ticks(robot_.ticks_for(seconds)); }

  MotionReport rotate_to(double target_yaw) {
    reset_pid();
    return rotate_in_place(robot_, calib_.motors, calib_.pid, target_yaw, config_);
  }

  /// Straight motion of `distance` cm at signed `speed` cm/s (negative drives
  /// backwards), holding the heading the robot has when called.
  MotionReport drive_distance(double distance, double speed) {
    const double yaw = robot_.gyro_yaw();
    return drive_arc(distance, yaw, yaw, speed);
  }

  /// Distance-based arc: the yaw target is interpolated linearly in travelled
  /// distance from yaw_start to yaw_end.
  MotionReport drive_arc(double distance, double yaw_start, double yaw_end, double speed) {
    check_motion(distance, speed);
    MotionReport report;
    const double t0 = robot_.time();
    const double step = std::abs(speed) * robot_.dt();
    reset_pid();
    robot_.mark("segment_start");
    double travelled = 0.0;
    // Stop on the tick whose end lies closest to the requested distance.
    while (distance - travelled > 0.5 * step) {
      const double fraction = travelled / distance;
      control_tick(yaw_start + (yaw_end - yaw_start) * fraction, speed);
      travelled += step;
      if (robot_.wall_contact()) {
        report.interrupted = true;
        robot_.mark("wall_contact");
        break;
      }
    }
    if (!report.interrupted) settle_heading(yaw_end);
    robot_.idle_ticks(1);
    report.completed = !report.interrupted;
    report.distance = travelled;
    report.duration = robot_.time() - t0;
    robot_.mark("segment_end");
    return report;
  }

 private:
  void check_motion(double distance, double speed) const {
    if (!(distance > 0)) throw DomainError("motion: distance must be > 0");
    const double limit = speed >= 0 ? calib_.velocity.max_speed_fwd()
                                    : calib_.velocity.max_speed_back();
    if (speed == 0.0 || std::abs(speed) > limit * (1.0 + 1e-9)) {
      throw DomainError("motion: speed outside the calibrated range");
    }
  }

  // Holds `target_yaw` in place until the error stays inside the arc-end
  // tolerance for the settle hold, or the timeout passes.
  void settle_heading(double target_yaw) {
    PidState pid;
    const double t0 = robot_.time();
    double inside_since = -1.0;
    while (robot_.time() - t0 < config_.arc_end_timeout) {
      yaw_hold_tick(robot_, calib_.motors, calib_.pid, pid, target_yaw, 0.0);
      if (std::abs(wrap_angle(target_yaw - robot_.gyro_yaw())) < config_.arc_end_tolerance) {
        if (inside_since < 0) inside_since = robot_.time();
        if (robot_.time() - inside_since >= config_.settle_hold - 1e-9) return;
      } else {
        inside_since = -1.0;
      }
    }
  }

  Robot& robot_;
  CalibrationRecord calib_;
  MotionConfig config_;
  PidState pid_;
};

/// The speed-based controller robots had before self-calibration: nominal
/// pulse offsets, no yaw feedback, timed in-place turns.
struct OpenLoopConfig {
  double us_per_cm_s = 12.0;      // pulse offset per cm/s of requested speed
  double turn_offset_us = 100.0;  // pulse offset used for in-place turns
  double assumed_turn_rate = 1.0;  // rad/s believed to result from turn_offset_us
};

class OpenLoopDriver {
 public:
  OpenLoopDriver(Robot& robot, OpenLoopConfig config = {}) : robot_(robot), config_(config) {}

  void drive_tick(double speed) {
    const double off = config_.us_per_cm_s * speed;
    robot_.tick(plant::kPwmNeutral + off, plant::kPwmNeutral - off);
  }

  /// Blind turn by `angle` rad (clockwise positive) based on the assumed rate.
  int turn_ticks(double angle) const {
    return robot_.ticks_for(std::abs(angle) / config_.assumed_turn_rate);
  }
  void turn_tick(double angle_sign) {
    const double off = angle_sign * config_.turn_offset_us;
    robot_.tick(plant::kPwmNeutral + off, plant::kPwmNeutral + off);
  }

 private:
  Robot& robot_;
  OpenLoopConfig config_;
};

enum class DriveMode { kClosedLoop, kOpenLoop };

struct WallBounceConfig {
  double speed = 8.0;               // cm/s
  double proximity_threshold = 15.0;  // cm, linearised rangefinder reading
  double rangefinder_scale = 21.6;  // K used for linearisation
  double rangefinder_offset = 0.16;  // C used for linearisation
};

enum class BounceAction { kDrive, kTurn, kFound, kIdle };

inline const char* to_string(BounceAction a) {
  switch (a) {
    case BounceAction::kDrive: return "drive";
    case BounceAction::kTurn: return "turn";
    case BounceAction::kFound: return "found";
    case BounceAction::kIdle: return "idle";
  }
  return "?";
}

/// New heading after meeting a wall: uniform within +-90 degrees of the
/// wall's inward normal.
template <class Rng>
double sample_bounce_heading(Vec2 inward_normal, Rng& rng) {
  std::uniform_real_distribution<double> spread(-0.5 * kPi, 0.5 * kPi);
  return yaw_of(inward_normal) + spread(rng);
}

/// Wall-bounce search: straight travel until the wall is close, then turn onto
/// a fresh heading pointing away from it; stop once inside a target disc.
/// step() advances exactly one control tick.
class WallBounceAgent {
 public:
  WallBounceAgent(Robot& robot, const CalibrationRecord* calib, WallBounceConfig config,
                  std::uint64_t seed, DriveMode mode = DriveMode::kClosedLoop)
      : robot_(robot), config_(config), rng_(seed), mode_(mode), open_loop_(robot) {
    if (mode_ == DriveMode::kClosedLoop) {
      if (calib == nullptr) throw DomainError("WallBounceAgent: closed loop needs a calibration");
      motion_.emplace(robot, *calib);
    }
    heading_target_ = robot_.gyro_yaw();
    robot_.mark("segment_start");
  }

  /// Restricts which targets end the search; by default every target does.
  void set_target_filter(std::function<bool(int)> accept) { accept_ = std::move(accept); }

  BounceAction step() {
    if (found_ >= 0) {
      robot_.idle_ticks(1);
      return BounceAction::kIdle;
    }
    BounceAction action;
    if (turning_) {
      action = BounceAction::kTurn;
      turn_tick();
    } else {
      action = BounceAction::kDrive;
      if (mode_ == DriveMode::kClosedLoop) {
        motion_->control_tick(heading_target_, config_.speed);
      } else {
        open_loop_.drive_tick(config_.speed);
      }
      if (near_wall()) start_turn();
    }
    const int t = robot_.arena().target_at(robot_.truth().position());
    if (t >= 0 && (!accept_ || accept_(t))) {
      if (!turning_) robot_.mark("segment_end");
      found_ = t;
      robot_.mark("target_found:" + std::to_string(t));
      return BounceAction::kFound;
    }
    return action;
  }

  /// Closes the current straight segment when the search is stopped.
  void finish() {
    if (found_ < 0 && !turning_) robot_.mark("segment_end");
  }

  int found_target() const { return found_; }
  bool turning() const { return turning_; }
  /// Yaw (ground-truth frame) chosen at the most recent bounce.
  double last_bounce_heading() const { return last_bounce_heading_; }
  int bounces() const { return bounces_; }

 private:
  bool near_wall() const {
    if (robot_.wall_contact()) return true;
    const double v = robot_.range_volts();
    if (!(v > config_.rangefinder_offset)) return false;
    return config_.rangefinder_scale / (v - config_.rangefinder_offset) <
           config_.proximity_threshold;
  }

  void start_turn() {
    robot_.mark("segment_end");
    robot_.mark(robot_.wall_contact() ? "wall_contact" : "wall_near");
    const Vec2 normal = plant::wall_normal_ahead(robot_.truth(), robot_.arena());
    last_bounce_heading_ = sample_bounce_heading(normal, rng_);
    const double rel = wrap_angle(last_bounce_heading_ - robot_.truth().yaw);
    ++bounces_;
    turning_ = true;
    if (mode_ == DriveMode::kClosedLoop) {
      heading_target_ = robot_.gyro_yaw() + rel;
      motion_->reset_pid();
      unwrap_ = {};
      inside_ticks_ = 0;
      turn_ticks_left_ = robot_.ticks_for(10.0);
    } else {
      turn_sign_ = rel >= 0 ? 1.0 : -1.0;
      turn_ticks_left_ = open_loop_.turn_ticks(rel);
    }
  }

  void turn_tick() {
    --turn_ticks_left_;
    if (mode_ == DriveMode::kOpenLoop) {
      open_loop_.turn_tick(turn_sign_);
      if (turn_ticks_left_ <= 0) end_turn();
      return;
    }
    motion_->control_tick(heading_target_, 0.0, &unwrap_);
    const double e = unwrap_.last;
    inside_ticks_ = std::abs(e) < deg_to_rad(2.0) ? inside_ticks_ + 1 : 0;
    if (inside_ticks_ >= robot_.ticks_for(0.2) || turn_ticks_left_ <= 0) {
      motion_->reset_pid();
      end_turn();
    }
  }

  void end_turn() {
    turning_ = false;
    robot_.mark("segment_start");
  }

  Robot& robot_;
  WallBounceConfig config_;
  std::mt19937_64 rng_;
  DriveMode mode_;
  std::optional<MotionController> motion_;
  OpenLoopDriver open_loop_;
  double heading_target_ = 0.0;
  double last_bounce_heading_ = 0.0;
  bool turning_ = false;
  int turn_ticks_left_ = 0;
  int inside_ticks_ = 0;
  double turn_sign_ = 1.0;
  int found_ = -1;
  int bounces_ = 0;
  std::function<bool(int)> accept_;
  ErrorUnwrapper unwrap_;
};

}  // namespace diffcal::control
