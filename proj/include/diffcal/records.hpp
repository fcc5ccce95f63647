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

// The learned artefact of the self-calibration routine.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "diffcal/core.hpp"
#include "diffcal/plant.hpp"

namespace diffcal::calib {

enum class Side { kLeft, kRight };
enum class Direction { kForward = 1, kBackward = -1 };

inline const char* to_string(Side s) { return s == Side::kLeft ? "left" : "right"; }
inline const char* to_string(Direction d) {
  return d == Direction::kForward ? "forward" : "backward";
}
inline double sign_of(Direction d) { return d == Direction::kForward ? 1.0 : -1.0; }

/// Ceiling of the servo's linear region, expressed as robot yaw rate.
constexpr double kLinearRegionCeiling = 1.5;  // rad/s

/// Two-point linear model of one motor in one direction, mapping the pulse
/// width to that motor's contribution to the robot yaw rate:
///   rate(pwm) = slope * pwm + intercept.
/// The slope is positive for both directions (pulse above neutral turns the
/// robot clockwise); the sign of rate_at_max carries the direction.
struct MotorDirectionFit {
  double deadzone_pwm = 0.0;
  double max_pwm = 0.0;
  double rate_at_max = 0.0;
  double slope = 0.0;
  double intercept = 0.0;

  double rate_at(double pwm) const { return slope * pwm + intercept; }
  double pwm_for(double rate) const { return (rate - intercept) / slope; }

  bool complete() const {
    return std::isfinite(slope) && slope > 0 && std::isfinite(intercept) && rate_at_max != 0 &&
           std::isfinite(deadzone_pwm) && std::isfinite(max_pwm);
  }

  friend bool operator==(const MotorDirectionFit&, const MotorDirectionFit&) = default;
};

/// Two-point line through (deadzone, 0) and max_point.
inline MotorDirectionFit fit_motor_map(double deadzone_pwm, double max_pwm, double rate_at_max) {
  if (rate_at_max == 0.0) throw FitError("fit_motor_map: zero rate at the maximum setting");
  if (max_pwm == deadzone_pwm) throw FitError("fit_motor_map: coincident points");
  MotorDirectionFit f;
  f.deadzone_pwm = deadzone_pwm;
  f.max_pwm = max_pwm;
  f.rate_at_max = rate_at_max;
  f.slope = rate_at_max / (max_pwm - deadzone_pwm);
  f.intercept = -f.slope * deadzone_pwm;
  if (!(f.slope > 0)) throw FitError("fit_motor_map: rate sign inconsistent with direction");
  return f;
}

struct MotorCalibration {
  MotorDirectionFit left_fwd;
  MotorDirectionFit left_back;
  MotorDirectionFit right_fwd;
  MotorDirectionFit right_back;

  const MotorDirectionFit& fit(Side s, Direction d) const {
    if (s == Side::kLeft) return d == Direction::kForward ? left_fwd : left_back;
    return d == Direction::kForward ? right_fwd : right_back;
  }
  MotorDirectionFit& fit(Side s, Direction d) {
    return const_cast<MotorDirectionFit&>(std::as_const(*this).fit(s, d));
  }

  bool complete() const {
    return left_fwd.complete() && left_back.complete() && right_fwd.complete() &&
           right_back.complete();
  }

  /// Smallest per-motor linear-region extreme; the largest per-wheel
  /// contribution every motor can deliver in both directions.
  double min_linear_extreme() const {
    return std::min({std::abs(left_fwd.rate_at_max), std::abs(left_back.rate_at_max),
                     std::abs(right_fwd.rate_at_max), std::abs(right_back.rate_at_max)});
  }

  /// Largest yaw-rate command the controllers issue.
  double max_rotation_command() const { return min_linear_extreme(); }

  friend bool operator==(const MotorCalibration&, const MotorCalibration&) = default;
};

enum class TuningRule { kZieglerNichols, kTyreusLuyben };

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double ku = 0.0;  // ultimate gain the gains were derived from
  double tu = 0.0;  // ultimate period, s

  bool complete() const {
    return std::isfinite(kp) && kp > 0 && std::isfinite(ki) && ki >= 0 && std::isfinite(kd) &&
           kd >= 0 && ku > 0 && tu > 0;
  }

  friend bool operator==(const PidGains&, const PidGains&) = default;
};

namespace detail {
inline PidGains gains_from_times(double ku, double tu, double kp, double ti, double td) {
  return {kp, kp / ti, kp * td, ku, tu};
}
inline void check_ultimate(double ku, double tu) {
  if (!(ku > 0 && tu > 0)) throw DomainError("tuning rules need Ku > 0 and Tu > 0");
}
}  // namespace detail

/// Ziegler-Nichols: Kp = Ku/1.7, Ti = Tu/2, Td = Tu/8.
inline PidGains zn_gains(double ku, double tu) {
  detail::check_ultimate(ku, tu);
  return detail::gains_from_times(ku, tu, ku / 1.7, tu / 2.0, tu / 8.0);
}

/// Tyreus-Luyben: Kp = Ku/2.2, Ti = 2.2 Tu, Td = Tu/6.3.
inline PidGains tlc_gains(double ku, double tu) {
  detail::check_ultimate(ku, tu);
  return detail::gains_from_times(ku, tu, ku / 2.2, 2.2 * tu, tu / 6.3);
}

inline PidGains tuning_gains(TuningRule rule, double ku, double tu) {
  return rule == TuningRule::kZieglerNichols ? zn_gains(ku, tu) : tlc_gains(ku, tu);
}

/// Linear speed as a function of the straight-motion command, the per-wheel
/// contribution omega_c on the omega_l = -omega_r locus. Anchored at the
/// origin, one slope per direction.
struct VelocityMap {
  double slope_fwd = 0.0;   // (cm/s) / (rad/s)
  double slope_back = 0.0;  // (cm/s) / (rad/s)
  double intercept_fwd = 0.0;
  double intercept_back = 0.0;
  double max_command = 0.0;  // rad/s

  double speed_for(double command) const {
    return command >= 0 ? slope_fwd * command + intercept_fwd
                        : slope_back * command - intercept_back;
  }
  double command_for(double speed) const {
    return speed >= 0 ? (speed - intercept_fwd) / slope_fwd
                      : (speed + intercept_back) / slope_back;
  }
  double max_speed_fwd() const { return speed_for(max_command); }
  double max_speed_back() const { return -speed_for(-max_command); }

  bool complete() const {
    return std::isfinite(slope_fwd) && slope_fwd > 0 && std::isfinite(slope_back) &&
           slope_back > 0 && max_command > 0;
  }

  friend bool operator==(const VelocityMap&, const VelocityMap&) = default;
};

constexpr int kSchemaVersion = 1;

struct CalibrationRecord {
  MotorCalibration motors;
  PidGains pid;
  VelocityMap velocity;
  double gyro_settle_time = 0.0;  // s
  double created_at = 0.0;        // simulated clock at completion, s
  int schema_version = kSchemaVersion;

  bool complete() const {
    return motors.complete() && pid.complete() && velocity.complete() &&
           std::isfinite(gyro_settle_time) && gyro_settle_time >= 0;
  }

  friend bool operator==(const CalibrationRecord&, const CalibrationRecord&) = default;
};

}  // namespace diffcal::calib
