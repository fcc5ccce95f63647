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

// Experiment descriptions: arena, robots, path family and its settings.
// Loaded from JSON (schema in docs/scenario_schema.md) or taken from the
// built-in presets.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffcal/calib.hpp"
#include "diffcal/control.hpp"
#include "diffcal/core.hpp"
#include "diffcal/plant.hpp"
#include "diffcal/robot.hpp"

namespace diffcal::harness {

/// Invalid scenario; issues() lists every problem with its field path.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid scenario:";
    for (const auto& i : issues) out += "\n  " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

enum class Family { kRepeatLine, kSquares, kCircles, kWallBounce };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::kRepeatLine: return "repeat_line";
    case Family::kSquares: return "squares";
    case Family::kCircles: return "circles";
    case Family::kWallBounce: return "wall_bounce";
  }
  return "?";
}

struct Pose {
  double x = 0.0;    // cm
  double y = 0.0;    // cm
  double yaw = 0.0;  // rad
};

struct RobotConfig {
  std::string name = "robot";
  RobotSpec spec;
  /// Wheels fitted while calibrating; spec.geometry is fitted afterwards.
  std::optional<plant::RobotGeometry> calibration_geometry;
  std::optional<Pose> start;
};

struct PathConfig {
  std::vector<double> sizes{30.0};  // cm: square side, circle diameter, line length
  std::vector<double> speeds{5.0};  // cm/s
  double turn = 1.0;                // +1 clockwise, -1 counter-clockwise
  int segments = 10;                // repeat_line legs
  double settle_before = 0.5;       // s static before each trial
};

struct BounceSettings {
  control::WallBounceConfig agent;
  double max_time = 600.0;  // s
  control::DriveMode mode = control::DriveMode::kClosedLoop;
  control::OpenLoopConfig open_loop;
};

struct Scenario {
  std::string name = "unnamed";
  Family family = Family::kSquares;
  std::uint64_t seed = 1;
  int trials = 1;
  double arena_width = 300.0;   // cm
  double arena_height = 300.0;  // cm
  std::vector<plant::Target> targets;
  std::vector<RobotConfig> robots{RobotConfig{}};
  PathConfig path;
  BounceSettings bounce;
  calib::CalibrationConfig calibration;
  /// Pre-computed calibration to load instead of running the routine.
  std::optional<std::string> calibration_file;

  plant::Arena arena() const { return plant::Arena::rectangle(arena_width, arena_height, targets); }

  /// Collects every problem, then throws ScenarioError if there is any.
  void validate() const {
    std::vector<std::string> issues;
    const auto check = [&](bool ok, const std::string& path, const std::string& what) {
      if (!ok) issues.push_back(path + ": " + what);
    };
    const auto guard = [&](const std::string& path, auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        issues.push_back(path + ": " + e.what());
      }
    };
    check(trials >= 1, "trials", "must be >= 1");
    check(arena_width > 0 && arena_height > 0, "arena", "width and height must be > 0");
    check(!robots.empty(), "robots", "at least one robot is required");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto& t = targets[i];
      const std::string p = "arena.targets[" + std::to_string(i) + "]";
      check(t.radius > 0, p + ".radius", "must be > 0");
      check(t.center.x >= 0 && t.center.x <= arena_width && t.center.y >= 0 &&
                t.center.y <= arena_height,
            p, "center outside the arena");
    }
    for (std::size_t i = 0; i < robots.size(); ++i) {
      const auto& r = robots[i];
      const std::string p = "robots[" + std::to_string(i) + "]";
      guard(p + ".geometry", [&] { r.spec.geometry.validate(); });
      guard(p + ".servo_left", [&] { r.spec.servo_left.validate(); });
      guard(p + ".servo_right", [&] { r.spec.servo_right.validate(); });
      guard(p + ".surface", [&] { r.spec.surface.validate(); });
      guard(p + ".gyro", [&] { r.spec.gyro.validate(); });
      guard(p + ".rangefinder", [&] { r.spec.rangefinder.validate(); });
      check(r.spec.actuation_delay_ticks >= 0, p + ".actuation_delay_ticks", "must be >= 0");
      if (r.calibration_geometry) {
        guard(p + ".calibration_geometry", [&] { r.calibration_geometry->validate(); });
      }
      if (r.start) {
        check(r.start->x >= 0 && r.start->x <= arena_width && r.start->y >= 0 &&
                  r.start->y <= arena_height,
              p + ".start", "outside the arena");
      }
    }
    if (family == Family::kWallBounce) {
      check(!targets.empty(), "arena.targets", "wall_bounce needs at least one target");
      check(bounce.agent.speed > 0, "bounce.speed", "must be > 0");
      check(bounce.agent.proximity_threshold > 0, "bounce.threshold", "must be > 0");
      check(bounce.max_time > 0, "bounce.max_time", "must be > 0");
    } else {
      check(!path.sizes.empty(), "path.sizes", "at least one size is required");
      check(!path.speeds.empty(), "path.speeds", "at least one speed is required");
      for (std::size_t i = 0; i < path.sizes.size(); ++i) {
        check(path.sizes[i] > 0, "path.sizes[" + std::to_string(i) + "]", "must be > 0");
      }
      for (std::size_t i = 0; i < path.speeds.size(); ++i) {
        check(path.speeds[i] > 0, "path.speeds[" + std::to_string(i) + "]", "must be > 0");
      }
      check(path.turn == 1.0 || path.turn == -1.0, "path.turn", "must be cw or ccw");
      check(path.segments >= 3 || family != Family::kRepeatLine, "path.segments",
            "repeat_line needs >= 3 segments");
    }
    if (!issues.empty()) throw ScenarioError(std::move(issues));
  }
};

namespace detail {

using nlohmann::json;

/// Reads JSON objects field by field, recording type errors and unknown keys
/// with their paths instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> issues;

  void object(const json& j, const std::string& path, std::set<std::string> known) {
    if (!j.is_object()) {
      issues.push_back(path + ": expected an object");
      return;
    }
    for (const auto& [k, v] : j.items()) {
      if (!known.count(k)) issues.push_back(join(path, k) + ": unknown field");
    }
  }

  void number(const json& j, const std::string& path, const char* key, double& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number()) {
      issues.push_back(join(path, key) + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  void integer(const json& j, const std::string& path, const char* key, int& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
      issues.push_back(join(path, key) + ": expected an integer");
      return;
    }
    out = v.get<int>();
  }

  void text(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_string()) {
      issues.push_back(join(path, key) + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  void numbers(const json& j, const std::string& path, const char* key, std::vector<double>& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array()) {
      issues.push_back(join(path, key) + ": expected an array of numbers");
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        issues.push_back(join(path, key) + "[" + std::to_string(i) + "]: expected a number");
        continue;
      }
      out.push_back(v[i].get<double>());
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline plant::RobotGeometry read_geometry(Reader& r, const json& j, const std::string& path,
                                          plant::RobotGeometry base) {
  r.object(j, path, {"wheel_diameter_left", "wheel_diameter_right", "wheel_separation"});
  double dl = base.wheel_diameter_left, dr = base.wheel_diameter_right,
         d = base.wheel_separation;
  r.number(j, path, "wheel_diameter_left", dl);
  r.number(j, path, "wheel_diameter_right", dr);
  r.number(j, path, "wheel_separation", d);
  plant::RobotGeometry g;
  g.wheel_diameter_left = dl;
  g.wheel_diameter_right = dr;
  g.wheel_separation = d;
  if (d > 0) {
    g.coupling_left = dl / (2.0 * d);
    g.coupling_right = dr / (2.0 * d);
  }
  return g;
}

inline void read_servo(Reader& r, const json& j, const std::string& path, plant::ServoCurve& c) {
  r.object(j, path,
           {"neutral_pwm", "deadzone_fwd", "deadzone_back", "gain_fwd", "gain_back",
            "saturation_rate"});
  r.number(j, path, "neutral_pwm", c.neutral_pwm);
  r.number(j, path, "deadzone_fwd", c.deadzone_halfwidth_fwd);
  r.number(j, path, "deadzone_back", c.deadzone_halfwidth_back);
  r.number(j, path, "gain_fwd", c.gain_fwd);
  r.number(j, path, "gain_back", c.gain_back);
  r.number(j, path, "saturation_rate", c.saturation_rate);
}

inline void read_surface(Reader& r, const json& j, const std::string& path,
                         plant::SurfaceModel& s) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "hard_floor") {
      s = plant::SurfaceModel{};
    } else if (name == "foam") {
      s = plant::foam_surface();
    } else {
      r.issues.push_back(path + ": unknown surface '" + name + "'");
    }
    return;
  }
  r.object(j, path, {"friction_fwd", "friction_back", "name"});
  r.number(j, path, "friction_fwd", s.linear_friction_scale_fwd);
  r.number(j, path, "friction_back", s.linear_friction_scale_back);
  r.text(j, path, "name", s.name);
}

inline void read_gyro(Reader& r, const json& j, const std::string& path,
                      sensors::GyroModel& g) {
  if (j.is_string()) {
    if (j.get<std::string>() == "ideal") {
      g = sensors::ideal_gyro();
    } else {
      r.issues.push_back(path + ": unknown gyro preset");
    }
    return;
  }
  r.object(j, path,
           {"settle_duration", "static_bias_prefit", "residual_static_drift", "moving_drift",
            "noise_sigma"});
  r.number(j, path, "settle_duration", g.settle_duration);
  r.number(j, path, "static_bias_prefit", g.static_bias_prefit);
  r.number(j, path, "residual_static_drift", g.residual_static_drift);
  r.number(j, path, "moving_drift", g.moving_drift);
  r.number(j, path, "noise_sigma", g.noise_sigma);
}

inline void read_rangefinder(Reader& r, const json& j, const std::string& path,
                             sensors::RangefinderModel& m) {
  r.object(j, path, {"scale", "offset", "noise_sigma"});
  r.number(j, path, "scale", m.scale);
  r.number(j, path, "offset", m.offset);
  r.number(j, path, "noise_sigma", m.noise_sigma);
}

inline Pose read_pose(Reader& r, const json& j, const std::string& path) {
  r.object(j, path, {"x", "y", "yaw_deg"});
  Pose p;
  double yaw_deg = 0.0;
  r.number(j, path, "x", p.x);
  r.number(j, path, "y", p.y);
  r.number(j, path, "yaw_deg", yaw_deg);
  p.yaw = deg_to_rad(yaw_deg);
  return p;
}

inline RobotConfig read_robot(Reader& r, const json& j, const std::string& path,
                              std::size_t index) {
  RobotConfig rc;
  rc.name = "robot" + std::to_string(index);
  r.object(j, path,
           {"name", "geometry", "calibration_geometry", "servo_left", "servo_right", "surface",
            "gyro", "rangefinder", "actuation_delay_ticks", "start"});
  if (!j.is_object()) return rc;
  r.text(j, path, "name", rc.name);
  if (j.contains("geometry")) {
    rc.spec.geometry = read_geometry(r, j["geometry"], path + ".geometry", rc.spec.geometry);
  }
  if (j.contains("calibration_geometry")) {
    rc.calibration_geometry = read_geometry(r, j["calibration_geometry"],
                                            path + ".calibration_geometry", rc.spec.geometry);
  }
  if (j.contains("servo_left")) read_servo(r, j["servo_left"], path + ".servo_left", rc.spec.servo_left);
  if (j.contains("servo_right")) {
    read_servo(r, j["servo_right"], path + ".servo_right", rc.spec.servo_right);
  }
  if (j.contains("surface")) read_surface(r, j["surface"], path + ".surface", rc.spec.surface);
  if (j.contains("gyro")) read_gyro(r, j["gyro"], path + ".gyro", rc.spec.gyro);
  if (j.contains("rangefinder")) {
    read_rangefinder(r, j["rangefinder"], path + ".rangefinder", rc.spec.rangefinder);
  }
  r.integer(j, path, "actuation_delay_ticks", rc.spec.actuation_delay_ticks);
  if (j.contains("start")) rc.start = read_pose(r, j["start"], path + ".start");
  return rc;
}

}  // namespace detail

/// Parses a scenario document; missing fields keep their defaults. Throws
/// ScenarioError listing every problem found.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  detail::Reader r;
  Scenario s;
  r.object(j, "", {"name", "family", "seed", "trials", "arena", "robots", "path", "bounce",
                   "calibration", "calibration_file"});
  if (!j.is_object()) throw ScenarioError(r.issues);
  r.text(j, "", "name", s.name);
  if (j.contains("family")) {
    std::string f;
    r.text(j, "", "family", f);
    if (f == "repeat_line") {
      s.family = Family::kRepeatLine;
    } else if (f == "squares") {
      s.family = Family::kSquares;
    } else if (f == "circles") {
      s.family = Family::kCircles;
    } else if (f == "wall_bounce") {
      s.family = Family::kWallBounce;
    } else if (!f.empty()) {
      r.issues.push_back("family: unknown family '" + f + "'");
    }
  }
  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned()) {
      s.seed = j["seed"].get<std::uint64_t>();
    } else {
      r.issues.push_back("seed: expected a non-negative integer");
    }
  }
  r.integer(j, "", "trials", s.trials);
  if (j.contains("arena")) {
    const auto& a = j["arena"];
    r.object(a, "arena", {"width", "height", "targets"});
    r.number(a, "arena", "width", s.arena_width);
    r.number(a, "arena", "height", s.arena_height);
    if (a.is_object() && a.contains("targets")) {
      if (!a["targets"].is_array()) {
        r.issues.push_back("arena.targets: expected an array");
      } else {
        for (std::size_t i = 0; i < a["targets"].size(); ++i) {
          const std::string p = "arena.targets[" + std::to_string(i) + "]";
          const auto& t = a["targets"][i];
          r.object(t, p, {"x", "y", "radius"});
          plant::Target target;
          r.number(t, p, "x", target.center.x);
          r.number(t, p, "y", target.center.y);
          r.number(t, p, "radius", target.radius);
          s.targets.push_back(target);
        }
      }
    }
  }
  if (j.contains("robots")) {
    if (!j["robots"].is_array()) {
      r.issues.push_back("robots: expected an array");
    } else {
      s.robots.clear();
      for (std::size_t i = 0; i < j["robots"].size(); ++i) {
        s.robots.push_back(
            detail::read_robot(r, j["robots"][i], "robots[" + std::to_string(i) + "]", i));
      }
    }
  }
  if (j.contains("path")) {
    const auto& p = j["path"];
    r.object(p, "path", {"sizes", "speeds", "turn", "segments", "settle_before"});
    r.numbers(p, "path", "sizes", s.path.sizes);
    r.numbers(p, "path", "speeds", s.path.speeds);
    r.integer(p, "path", "segments", s.path.segments);
    r.number(p, "path", "settle_before", s.path.settle_before);
    if (p.is_object() && p.contains("turn")) {
      std::string turn;
      r.text(p, "path", "turn", turn);
      if (turn == "cw") {
        s.path.turn = 1.0;
      } else if (turn == "ccw") {
        s.path.turn = -1.0;
      } else if (!turn.empty()) {
        r.issues.push_back("path.turn: expected 'cw' or 'ccw'");
      }
    }
  }
  if (j.contains("bounce")) {
    const auto& b = j["bounce"];
    r.object(b, "bounce", {"speed", "threshold", "max_time", "controller"});
    r.number(b, "bounce", "speed", s.bounce.agent.speed);
    r.number(b, "bounce", "threshold", s.bounce.agent.proximity_threshold);
    r.number(b, "bounce", "max_time", s.bounce.max_time);
    if (b.is_object() && b.contains("controller")) {
      std::string c;
      r.text(b, "bounce", "controller", c);
      if (c == "closed_loop") {
        s.bounce.mode = control::DriveMode::kClosedLoop;
      } else if (c == "open_loop") {
        s.bounce.mode = control::DriveMode::kOpenLoop;
      } else if (!c.empty()) {
        r.issues.push_back("bounce.controller: expected 'closed_loop' or 'open_loop'");
      }
    }
  }
  if (j.contains("calibration")) {
    const auto& c = j["calibration"];
    r.object(c, "calibration", {"rule", "rangefinder_scale", "rangefinder_offset"});
    r.number(c, "calibration", "rangefinder_scale", s.calibration.rangefinder_scale);
    r.number(c, "calibration", "rangefinder_offset", s.calibration.rangefinder_offset);
    if (c.is_object() && c.contains("rule")) {
      std::string rule;
      r.text(c, "calibration", "rule", rule);
      if (rule == "tlc") {
        s.calibration.rule = calib::TuningRule::kTyreusLuyben;
      } else if (rule == "zn") {
        s.calibration.rule = calib::TuningRule::kZieglerNichols;
      } else if (!rule.empty()) {
        r.issues.push_back("calibration.rule: expected 'tlc' or 'zn'");
      }
    }
  }
  if (j.contains("calibration_file")) {
    std::string f;
    r.text(j, "", "calibration_file", f);
    if (!f.empty()) s.calibration_file = f;
  }
  s.bounce.agent.rangefinder_scale = s.calibration.rangefinder_scale;
  s.bounce.agent.rangefinder_offset = s.calibration.rangefinder_offset;
  if (!r.issues.empty()) throw ScenarioError(r.issues);
  s.validate();
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path + ": cannot open"});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError({path + ": " + e.what()});
  }
  return scenario_from_json(j);
}

/// Names accepted by builtin_scenario().
inline std::vector<std::string> builtin_scenario_names() {
  return {"gyro_drift_line",    "squares",           "circles",
          "square_speed_sweep", "circle_speed_sweep", "wall_bounce_search",
          "wall_bounce_open_loop", "miscalibration"};
}

inline Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.seed = 2026;
  s.trials = 3;
  if (name == "gyro_drift_line") {
    s.family = Family::kRepeatLine;
    s.path.sizes = {50.0};
    s.path.speeds = {5.0};
    s.path.segments = 10;
  } else if (name == "squares") {
    s.family = Family::kSquares;
    s.path.sizes = {30.0, 50.0, 80.0};
    s.path.speeds = {5.0};
  } else if (name == "circles") {
    s.family = Family::kCircles;
    s.path.sizes = {30.0, 50.0, 80.0};
    s.path.speeds = {5.0};
  } else if (name == "square_speed_sweep") {
    s.family = Family::kSquares;
    s.path.sizes = {30.0};
    s.path.speeds = {2.0, 4.0, 6.0, 8.0, 10.0};
  } else if (name == "circle_speed_sweep") {
    s.family = Family::kCircles;
    s.path.sizes = {30.0};
    s.path.speeds = {2.0, 4.0, 6.0, 8.0, 10.0};
  } else if (name == "wall_bounce_search" || name == "wall_bounce_open_loop") {
    s.family = Family::kWallBounce;
    s.trials = 1;
    s.arena_width = 250.0;
    s.arena_height = 250.0;
    s.targets = {{{60.0, 190.0}, 15.0}, {{190.0, 60.0}, 15.0}, {{185.0, 185.0}, 15.0}};
    s.robots.clear();
    for (int i = 0; i < 4; ++i) {
      RobotConfig rc;
      rc.name = "robot" + std::to_string(i);
      s.robots.push_back(rc);
    }
    s.bounce.max_time = 1200.0;
    if (name == "wall_bounce_open_loop") s.bounce.mode = control::DriveMode::kOpenLoop;
  } else if (name == "miscalibration") {
    s.family = Family::kSquares;
    s.path.sizes = {50.0};
    s.path.speeds = {5.0};
    s.robots.clear();
    RobotConfig matched;
    matched.name = "matched";
    RobotConfig mis;
    mis.name = "miscalibrated";
    mis.calibration_geometry = plant::RobotGeometry::from_dimensions(6.0, 6.0, 10.0);
    mis.spec.geometry = plant::RobotGeometry::from_dimensions(6.0, 6.9, 10.0);
    s.robots = {matched, mis};
  } else {
    throw ScenarioError({"unknown built-in scenario '" + name + "'"});
  }
  s.validate();
  return s;
}

/// "builtin:<name>" selects a preset; anything else is a file path.
inline Scenario resolve_scenario(const std::string& ref) {
  const std::string prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) return builtin_scenario(ref.substr(prefix.size()));
  return load_scenario_file(ref);
}

}  // namespace diffcal::harness
