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

// Ground-truth physics of a differential wheeled robot driven by two
// continuous-rotation servos.
//
// Sign conventions used throughout the library:
//  * yaw is positive clockwise; heading_vector(yaw) = (cos yaw, -sin yaw).
//  * A servo pulse above neutral spins that servo in its "forward" direction.
//    The right servo is mounted mirrored, so for *both* motors a pulse above
//    neutral produces a positive (clockwise) contribution to the robot's yaw
//    rate. Driving straight ahead therefore needs the left pulse above and
//    the right pulse below neutral.
//  * omega_l / omega_r are the per-motor contributions to the robot's yaw
//    rate, i.e. what a gyroscope reads when only that motor turns:
//      omega_i = K_i * servo_rate_i,  K_i = D_i / (2 d).
//    The robot's yaw rate is their sum and the linear speed is
//    v = (d / 2) * (omega_l - omega_r).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "diffcal/core.hpp"

namespace diffcal::plant {

constexpr double kPwmMin = 1000.0;
constexpr double kPwmMax = 2000.0;
constexpr double kPwmNeutral = 1500.0;

/// Control / simulation period (50 Hz).
constexpr double kDefaultDt = 0.02;
constexpr double kMaxDt = 0.1;

struct RobotGeometry {
  double wheel_diameter_left = 6.0;   // cm
  double wheel_diameter_right = 6.0;  // cm
  double wheel_separation = 10.0;     // cm
  double coupling_left = 0.3;         // robot rad/s per wheel rad/s
  double coupling_right = 0.3;

  /// Builds a geometry whose couplings are consistent with the dimensions.
  static RobotGeometry from_dimensions(double diameter_left, double diameter_right,
                                       double separation) {
    RobotGeometry g;
    g.wheel_diameter_left = diameter_left;
    g.wheel_diameter_right = diameter_right;
    g.wheel_separation = separation;
    g.coupling_left = diameter_left / (2.0 * separation);
    g.coupling_right = diameter_right / (2.0 * separation);
    g.validate();
    return g;
  }

  void validate() const {
    if (!(wheel_diameter_left > 0 && wheel_diameter_right > 0 && wheel_separation > 0 &&
          coupling_left > 0 && coupling_right > 0)) {
      throw DomainError("RobotGeometry: all fields must be positive");
    }
    const auto consistent = [&](double k, double dia) {
      const double expect = dia / (2.0 * wheel_separation);
      return std::abs(k - expect) <= 1e-9 * expect;
    };
    if (!consistent(coupling_left, wheel_diameter_left) ||
        !consistent(coupling_right, wheel_diameter_right)) {
      throw DomainError("RobotGeometry: couplings inconsistent with D / (2 d)");
    }
  }

  friend bool operator==(const RobotGeometry&, const RobotGeometry&) = default;
};

/// Piecewise-linear PWM -> wheel rate response of a continuous-rotation servo:
/// dead-zone around neutral, a linear region, then saturation. The forward
/// (pulse above neutral) and backward branches are parameterised separately.
struct ServoCurve {
  double neutral_pwm = kPwmNeutral;     // us
  double deadzone_halfwidth_fwd = 30.0;  // us
  double deadzone_halfwidth_back = 35.0;
  double gain_fwd = 4.0 / 120.0;   // (rad/s) / us
  double gain_back = 4.0 / 165.0;  // (rad/s) / us
  double saturation_rate = 5.0;    // rad/s

  void validate() const {
    if (!(saturation_rate > 0)) throw DomainError("ServoCurve: saturation_rate must be > 0");
    if (!(deadzone_halfwidth_fwd >= 0 && deadzone_halfwidth_back >= 0)) {
      throw DomainError("ServoCurve: dead-zone half-widths must be >= 0");
    }
    if (!(gain_fwd > 0 && gain_back > 0)) throw DomainError("ServoCurve: gains must be > 0");
    if (!(neutral_pwm > kPwmMin && neutral_pwm < kPwmMax)) {
      throw DomainError("ServoCurve: neutral_pwm outside pulse range");
    }
  }

  friend bool operator==(const ServoCurve&, const ServoCurve&) = default;
};

/// Documented default servos. The two motors of one robot are deliberately
/// not identical.
inline ServoCurve default_left_servo() { return ServoCurve{}; }

inline ServoCurve default_right_servo() {
  ServoCurve c;
  c.deadzone_halfwidth_fwd = 36.0;
  c.deadzone_halfwidth_back = 28.0;
  c.gain_fwd = 0.032;
  c.gain_back = 0.025;
  return c;
}

struct SurfaceModel {
  double linear_friction_scale_fwd = 0.97;
  double linear_friction_scale_back = 0.94;
  std::string name = "hard_floor";

  void validate() const {
    const auto ok = [](double s) { return s > 0.0 && s <= 1.0; };
    if (!ok(linear_friction_scale_fwd) || !ok(linear_friction_scale_back)) {
      throw DomainError("SurfaceModel: friction scales must lie in (0, 1]");
    }
  }

  friend bool operator==(const SurfaceModel&, const SurfaceModel&) = default;
};

inline SurfaceModel foam_surface() { return {0.78, 0.75, "foam"}; }

struct PlantState {
  double x = 0.0;    // cm
  double y = 0.0;    // cm
  double yaw = 0.0;  // rad, clockwise positive, unwrapped
  double time = 0.0;  // s
  bool wall_contact = false;

  Vec2 position() const { return {x, y}; }
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Target {
  Vec2 center;
  double radius = 10.0;  // cm
};

/// Axis-aligned rectangular arena [0, width] x [0, height] bounded by four
/// wall segments, with optional circular targets inside.
struct Arena {
  double width = 200.0;   // cm
  double height = 200.0;  // cm
  std::vector<Segment> walls;
  std::vector<Target> targets;

  static Arena rectangle(double width, double height, std::vector<Target> targets = {}) {
    Arena arena;
    arena.width = width;
    arena.height = height;
    const Vec2 p00{0, 0}, p10{width, 0}, p11{width, height}, p01{0, height};
    arena.walls = {{p00, p10}, {p10, p11}, {p11, p01}, {p01, p00}};
    arena.targets = std::move(targets);
    arena.validate();
    return arena;
  }

  bool contains(Vec2 p, double tol = 1e-9) const {
    return p.x >= -tol && p.y >= -tol && p.x <= width + tol && p.y <= height + tol;
  }

  void validate() const {
    if (!(width > 0 && height > 0)) throw DomainError("Arena: width and height must be > 0");
    if (walls.size() < 3) throw DomainError("Arena: walls do not form a closed boundary");
    for (std::size_t i = 0; i < walls.size(); ++i) {
      const auto& next = walls[(i + 1) % walls.size()];
      if ((walls[i].b - next.a).norm() > 1e-9) {
        throw DomainError("Arena: walls do not form a closed boundary");
      }
    }
    for (const auto& t : targets) {
      if (!(t.radius > 0) || !contains(t.center)) {
        throw DomainError("Arena: target outside the boundary");
      }
    }
  }

  /// Index of the first target whose disc contains p, or -1.
  int target_at(Vec2 p) const {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if ((p - targets[i].center).norm() <= targets[i].radius) return static_cast<int>(i);
    }
    return -1;
  }
};

/// Servo output (wheel rad/s) for a pulse width in [1000, 2000] us.
inline double servo_rate(const ServoCurve& curve, double pwm) {
  if (!(pwm >= kPwmMin && pwm <= kPwmMax)) {
    throw DomainError("servo_rate: pwm " + std::to_string(pwm) + " outside [1000, 2000] us");
  }
  const double offset = pwm - curve.neutral_pwm;
  if (offset > curve.deadzone_halfwidth_fwd) {
    return std::min(curve.gain_fwd * (offset - curve.deadzone_halfwidth_fwd),
                    curve.saturation_rate);
  }
  if (offset < -curve.deadzone_halfwidth_back) {
    return std::max(curve.gain_back * (offset + curve.deadzone_halfwidth_back),
                    -curve.saturation_rate);
  }
  return 0.0;
}

struct BodyRates {
  double v = 0.0;      // cm/s
  double omega = 0.0;  // rad/s, clockwise positive
};

/// Combines per-motor yaw-rate contributions into the body twist.
inline BodyRates body_rates(const RobotGeometry& geometry, double omega_l, double omega_r) {
  return {0.5 * geometry.wheel_separation * (omega_l - omega_r), omega_l + omega_r};
}

/// Exact constant-twist (arc) integration of a pose over dt.
inline PlantState integrate_twist(PlantState s, double v, double omega, double dt) {
  const double turn = omega * dt;
  if (v != 0.0) {
    // Chord of the arc, taken along the mid-arc heading.
    const double half = 0.5 * turn;
    const double chord_scale = std::abs(half) < 1e-9 ? 1.0 - half * half / 6.0
                                                     : std::sin(half) / half;
    const Vec2 dir = heading_vector(s.yaw + half);
    const double chord = v * dt * chord_scale;
    s.x += chord * dir.x;
    s.y += chord * dir.y;
  }
  s.yaw += turn;
  s.time += dt;
  return s;
}

/// The simulated robot body: geometry, two servos, floor friction and the arena
/// it is confined to.
class DiffDrivePlant {
 public:
  DiffDrivePlant(RobotGeometry geometry, ServoCurve left, ServoCurve right,
                 SurfaceModel surface, Arena arena)
      : geometry_(geometry),
        left_(left),
        right_(right),
        surface_(std::move(surface)),
        arena_(std::move(arena)) {
    geometry_.validate();
    left_.validate();
    right_.validate();
    surface_.validate();
    arena_.validate();
  }

  const RobotGeometry& geometry() const { return geometry_; }
  const ServoCurve& left_servo() const { return left_; }
  const ServoCurve& right_servo() const { return right_; }
  const SurfaceModel& surface() const { return surface_; }
  const Arena& arena() const { return arena_; }

  void set_geometry(const RobotGeometry& g) {
    g.validate();
    geometry_ = g;
  }
  void set_surface(SurfaceModel s) {
    s.validate();
    surface_ = std::move(s);
  }
  void set_arena(Arena a) {
    a.validate();
    arena_ = std::move(a);
  }

  /// Per-motor yaw-rate contributions for a pair of pulses.
  std::pair<double, double> motor_contributions(double pwm_left, double pwm_right) const {
    return {geometry_.coupling_left * servo_rate(left_, pwm_left),
            geometry_.coupling_right * servo_rate(right_, pwm_right)};
  }

  /// Body twist after friction for a pair of pulses.
  BodyRates twist(double pwm_left, double pwm_right) const {
    const auto [wl, wr] = motor_contributions(pwm_left, pwm_right);
    BodyRates r = body_rates(geometry_, wl, wr);
    r.v *= r.v >= 0.0 ? surface_.linear_friction_scale_fwd
                      : surface_.linear_friction_scale_back;
    return r;
  }

  PlantState step(const PlantState& state, double pwm_left, double pwm_right,
                  double dt) const {
    if (!(dt > 0.0 && dt <= kMaxDt)) throw DomainError("step: dt must lie in (0, 0.1] s");
    const BodyRates r = twist(pwm_left, pwm_right);
    PlantState next = integrate_twist(state, r.v, r.omega, dt);
    next.wall_contact = false;
    const double cx = std::clamp(next.x, 0.0, arena_.width);
    const double cy = std::clamp(next.y, 0.0, arena_.height);
    if (cx != next.x || cy != next.y) {
      next.x = cx;
      next.y = cy;
      next.wall_contact = true;
    }
    return next;
  }

 private:
  RobotGeometry geometry_;
  ServoCurve left_;
  ServoCurve right_;
  SurfaceModel surface_;
  Arena arena_;
};

struct RayHit {
  double distance = std::numeric_limits<double>::infinity();
  int wall = -1;
};

/// Nearest wall along the ray from `origin` in direction `yaw`.
inline RayHit cast_ray(const Arena& arena, Vec2 origin, double yaw) {
  const Vec2 dir = heading_vector(yaw);
  RayHit best;
  for (std::size_t i = 0; i < arena.walls.size(); ++i) {
    const Vec2 a = arena.walls[i].a;
    const Vec2 e = arena.walls[i].b - a;
    const double denom = dir.cross(e);
    if (std::abs(denom) < 1e-12) continue;
    const Vec2 w = a - origin;
    const double t = w.cross(e) / denom;
    const double u = w.cross(dir) / denom;
    if (u < -1e-12 || u > 1.0 + 1e-12 || t < -1e-9) continue;
    const double dist = std::max(t, 0.0);
    if (dist < best.distance) best = {dist, static_cast<int>(i)};
  }
  return best;
}

/// Distance from the robot to the nearest wall straight ahead.
inline double raycast_distance(const PlantState& state, const Arena& arena) {
  if (!arena.contains(state.position(), 1e-6)) {
    throw GeometryError("raycast_distance: pose outside arena");
  }
  const RayHit hit = cast_ray(arena, state.position(), state.yaw);
  if (hit.wall < 0) throw GeometryError("raycast_distance: no wall along heading");
  return hit.distance;
}

/// Unit normal of the wall straight ahead, pointing back into the arena.
inline Vec2 wall_normal_ahead(const PlantState& state, const Arena& arena) {
  const RayHit hit = cast_ray(arena, state.position(), state.yaw);
  if (hit.wall < 0) throw GeometryError("wall_normal_ahead: no wall along heading");
  const Segment& s = arena.walls[static_cast<std::size_t>(hit.wall)];
  const Vec2 e = s.b - s.a;
  Vec2 n{-e.y / e.norm(), e.x / e.norm()};
  if (n.dot(heading_vector(state.yaw)) > 0) n = -1.0 * n;
  return n;
}

}  // namespace diffcal::plant
