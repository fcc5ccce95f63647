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

// A simulated robot: plant, gyroscope and rangefinder advanced together at
// the fixed control rate. Controllers see only pulses in and sensor readings
// out; ground truth is exposed separately for logging and evaluation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string_view>
#include <utility>

#include "diffcal/plant.hpp"
#include "diffcal/sensors.hpp"

namespace diffcal {

struct RobotSpec {
  plant::RobotGeometry geometry;
  plant::ServoCurve servo_left = plant::default_left_servo();
  plant::ServoCurve servo_right = plant::default_right_servo();
  plant::SurfaceModel surface;
  sensors::GyroModel gyro;
  sensors::RangefinderModel rangefinder;
  /// Pulse-to-motion latency in control ticks (servo frame + on-chip filter).
  int actuation_delay_ticks = 3;
  double dt = plant::kDefaultDt;

  void validate() const {
    geometry.validate();
    servo_left.validate();
    servo_right.validate();
    surface.validate();
    gyro.validate();
    rangefinder.validate();
    if (actuation_delay_ticks < 0) throw DomainError("RobotSpec: negative actuation delay");
    if (!(dt > 0 && dt <= plant::kMaxDt)) throw DomainError("RobotSpec: dt outside (0, 0.1]");
  }
};

class Robot;

/// Receives every control tick and every event marker of a robot.
class RobotObserver {
 public:
  virtual ~RobotObserver() = default;
  virtual void on_tick(const Robot& robot) = 0;
  virtual void on_event(const Robot& robot, std::string_view event) = 0;
};

class Robot {
 public:
  Robot(const RobotSpec& spec, plant::Arena arena, plant::PlantState start)
      : spec_(spec),
        plant_(spec.geometry, spec.servo_left, spec.servo_right, spec.surface, std::move(arena)),
        gyro_(spec.gyro, start.time),
        rangefinder_(spec.rangefinder),
        truth_(start),
        start_time_(start.time) {
    spec_.validate();
    if (!plant_.arena().contains(truth_.position())) {
      throw GeometryError("Robot: start pose outside arena");
    }
    pending_.assign(static_cast<std::size_t>(spec_.actuation_delay_ticks),
                    {plant::kPwmNeutral, plant::kPwmNeutral});
    sample_sensors(false);
  }

  /// Sends one pair of pulses and advances the world by one control period.
  /// Pulses are clamped to the physical range.
  void tick(double pwm_left, double pwm_right) {
    pwm_left = std::clamp(pwm_left, plant::kPwmMin, plant::kPwmMax);
    pwm_right = std::clamp(pwm_right, plant::kPwmMin, plant::kPwmMax);
    pending_.emplace_back(pwm_left, pwm_right);
    const auto [al, ar] = pending_.front();
    pending_.pop_front();
    applied_ = {al, ar};
    const plant::BodyRates twist = plant_.twist(al, ar);
    truth_ = plant_.step(truth_, al, ar, spec_.dt);
    ++ticks_;
    truth_.time = start_time_ + static_cast<double>(ticks_) * spec_.dt;
    sample_sensors(twist.v != 0.0 || twist.omega != 0.0);
    if (observer_ != nullptr) observer_->on_tick(*this);
  }

  void idle_ticks(int n) {
    for (int i = 0; i < n; ++i) tick(plant::kPwmNeutral, plant::kPwmNeutral);
  }

  /// Number of ticks covering `seconds` (at least one).
  int ticks_for(double seconds) const {
    return std::max(1, static_cast<int>(std::lround(seconds / spec_.dt)));
  }

  void mark(std::string_view event) {
    if (observer_ != nullptr) observer_->on_event(*this, event);
  }

  /// Picks the robot up and puts it down elsewhere; sensors keep running.
  void place(plant::Arena arena, double x, double y, double yaw) {
    plant_.set_arena(std::move(arena));
    truth_.x = x;
    truth_.y = y;
    truth_.yaw = yaw;
    truth_.wall_contact = false;
    if (!plant_.arena().contains(truth_.position())) {
      throw GeometryError("Robot::place: pose outside arena");
    }
    sample_sensors(false);
  }

  /// Swaps the wheels (geometry) without touching the calibration.
  void set_geometry(const plant::RobotGeometry& g) { plant_.set_geometry(g); }
  void set_surface(plant::SurfaceModel s) { plant_.set_surface(std::move(s)); }

  void set_observer(RobotObserver* observer) { observer_ = observer; }

  double time() const { return truth_.time; }
  double dt() const { return spec_.dt; }
  std::int64_t ticks() const { return ticks_; }

  /// Latest gyroscope yaw reading, rad.
  double gyro_yaw() const { return gyro_yaw_; }
  /// Latest rangefinder output, V.
  double range_volts() const { return range_volts_; }
  bool wall_contact() const { return truth_.wall_contact; }

  const plant::PlantState& truth() const { return truth_; }
  const plant::DiffDrivePlant& plant() const { return plant_; }
  const plant::Arena& arena() const { return plant_.arena(); }
  const RobotSpec& spec() const { return spec_; }
  const sensors::Gyro& gyro() const { return gyro_; }
  std::pair<double, double> applied_pwm() const { return applied_; }

 private:
  void sample_sensors(bool moving) {
    gyro_yaw_ = gyro_.sample(truth_.yaw, truth_.time, moving);
    range_volts_ = rangefinder_.read(plant::cast_ray(plant_.arena(), truth_.position(),
                                                     truth_.yaw).distance);
  }

  RobotSpec spec_;
  plant::DiffDrivePlant plant_;
  sensors::Gyro gyro_;
  sensors::Rangefinder rangefinder_;
  plant::PlantState truth_;
  double start_time_ = 0.0;
  std::int64_t ticks_ = 0;
  std::deque<std::pair<double, double>> pending_;
  std::pair<double, double> applied_{plant::kPwmNeutral, plant::kPwmNeutral};
  double gyro_yaw_ = 0.0;
  double range_volts_ = 0.0;
  RobotObserver* observer_ = nullptr;
};

}  // namespace diffcal
