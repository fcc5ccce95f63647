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

// Executes scenarios. Every path trial powers on a fresh robot with seeds
// derived from the master seed, calibrates it in front of a wall, moves it to
// the start pose and runs one instance of the path. Trials are independent.

#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "diffcal/calib.hpp"
#include "diffcal/control.hpp"
#include "diffcal/harness/metrics.hpp"
#include "diffcal/harness/scenario.hpp"
#include "diffcal/harness/trajectory.hpp"
#include "diffcal/robot.hpp"
#include "diffcal/store.hpp"

namespace diffcal::harness {

/// Side of the square room used for the calibration routine, and the
/// distance from the wall the robot starts at.
constexpr double kCalibrationRoom = 200.0;     // cm
constexpr double kCalibrationStandoff = 45.0;  // cm

struct TrialRun {
  TrajectoryLog log;
  TrialMetrics metrics;
  std::optional<calib::CalibrationRecord> calibration;
};

struct ScenarioResult {
  std::vector<TrialRun> runs;
  DriftReport report;
};

/// Robot spec with the sensor seeds of (robot, trial).
inline RobotSpec seeded_spec(const RobotConfig& rc, std::uint64_t seed, std::size_t robot,
                             std::size_t trial) {
  RobotSpec spec = rc.spec;
  if (rc.calibration_geometry) spec.geometry = *rc.calibration_geometry;
  spec.gyro.seed = derive_seed(seed, robot, trial, 1);
  spec.rangefinder.seed = derive_seed(seed, robot, trial, 2);
  return spec;
}

/// Powers a robot on, facing a wall in the calibration room.
inline std::unique_ptr<Robot> power_on(const RobotSpec& spec) {
  const plant::Arena room = plant::Arena::rectangle(kCalibrationRoom, kCalibrationRoom);
  return std::make_unique<Robot>(
      spec, room,
      plant::PlantState{kCalibrationRoom - kCalibrationStandoff, 0.5 * kCalibrationRoom, 0.0,
                        0.0, false});
}

/// Produces the robot's calibration: loaded from the scenario's file (after
/// the gyro settles) or measured by the full routine.
inline calib::CalibrationRecord calibrate(Robot& robot, const Scenario& s) {
  if (s.calibration_file) {
    calib::settle_gyro(robot, s.calibration);
    return store::load_calibration(*s.calibration_file);
  }
  return calib::run_full_calibration(robot, s.calibration).record;
}

inline Pose default_start(const Scenario& s) {
  switch (s.family) {
    case Family::kSquares:
    case Family::kCircles:
      return {0.3 * s.arena_width, s.path.turn > 0 ? 0.7 * s.arena_height
                                                   : 0.3 * s.arena_height, 0.0};
    case Family::kRepeatLine:
      return {0.3 * s.arena_width, 0.5 * s.arena_height, 0.0};
    case Family::kWallBounce:
      break;
  }
  return {0.5 * s.arena_width, 0.5 * s.arena_height, 0.0};
}

namespace detail {

inline void run_path(control::MotionController& mc, const Scenario& s, double size, double speed) {
  Robot& robot = mc.robot();
  const double ref = robot.gyro_yaw();
  switch (s.family) {
    case Family::kSquares:
      for (int k = 0; k < 4; ++k) {
        const double h = ref + s.path.turn * k * 0.5 * kPi;
        mc.rotate_to(h);
        mc.drive_arc(size, h, h, speed);
      }
      break;
    case Family::kCircles:
      mc.drive_arc(kPi * size, ref, ref + s.path.turn * kTwoPi, speed);
      break;
    case Family::kRepeatLine:
      for (int k = 0; k < s.path.segments; ++k) {
        const double h = ref + (k % 2 == 0 ? 0.0 : kPi);
        mc.rotate_to(h);
        mc.drive_arc(size, h, h, speed);
      }
      break;
    case Family::kWallBounce:
      throw DomainError("run_path: wall bounce is not a path family");
  }
}

inline NominalPath nominal_for(const Scenario& s, double size) {
  switch (s.family) {
    case Family::kSquares: return nominal_square(size, s.path.turn);
    case Family::kCircles: return nominal_circle(size);
    case Family::kRepeatLine: return nominal_line(size, s.path.segments);
    case Family::kWallBounce: break;
  }
  throw DomainError("nominal_for: no nominal path for wall bounce");
}

inline std::string trial_label(const Scenario& s, const RobotConfig& rc, double size, double speed,
                               int trial) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_%s_s%g_v%g_t%d", s.name.c_str(), rc.name.c_str(), size, speed,
                trial);
  return buf;
}

}  // namespace detail

/// One path trial.
inline TrialRun run_path_trial(const Scenario& s, std::size_t robot_index, double size,
                               double speed, int trial, std::uint64_t trial_key) {
  const RobotConfig& rc = s.robots.at(robot_index);
  auto robot = power_on(seeded_spec(rc, s.seed, robot_index, trial_key));
  TrialRun run;
  run.calibration = calibrate(*robot, s);
  if (rc.calibration_geometry) robot->set_geometry(rc.spec.geometry);
  const Pose start = rc.start.value_or(default_start(s));
  robot->place(s.arena(), start.x, start.y, start.yaw);
  robot->idle_ticks(robot->ticks_for(s.path.settle_before));

  control::MotionController mc(*robot, *run.calibration);
  run.log.label = detail::trial_label(s, rc, size, speed, trial);
  TrajectoryRecorder recorder(run.log);
  recorder.attach(*robot);
  const double t0 = robot->time();
  robot->mark("trial_start:" + std::to_string(trial));
  detail::run_path(mc, s, size, speed);
  robot->mark("trial_end:" + std::to_string(trial));
  robot->set_observer(nullptr);

  TrialMetrics& m = run.metrics;
  m.robot = rc.name;
  m.trial = trial;
  m.size = size;
  m.speed = speed;
  m.duration = robot->time() - t0;
  const TrajectoryLog aligned = align_trial(run.log);
  m.linear_drift = linear_drift(aligned, detail::nominal_for(s, size));
  if (s.family == Family::kCircles) {
    m.diameter = circle_diameter(aligned);
    m.diameter_drift = diameter_drift(m.diameter, size);
  }
  if (s.family == Family::kRepeatLine) m.rotational_drift = rotational_drift(aligned);
  return run;
}

/// All robots search the same arena simultaneously until every target is
/// found or time runs out.
inline std::vector<TrialRun> run_wall_bounce(const Scenario& s, int trial) {
  const plant::Arena arena = s.arena();
  const std::size_t n = s.robots.size();
  std::vector<std::unique_ptr<Robot>> robots;
  std::vector<std::optional<calib::CalibrationRecord>> records(n);
  std::vector<TrialRun> runs(n);
  std::mt19937_64 placement(derive_seed(s.seed, 0xb0, static_cast<std::uint64_t>(trial), 4));
  std::uniform_real_distribution<double> ux(30.0, s.arena_width - 30.0);
  std::uniform_real_distribution<double> uy(30.0, s.arena_height - 30.0);
  std::uniform_real_distribution<double> uyaw(-kPi, kPi);
  for (std::size_t i = 0; i < n; ++i) {
    const RobotConfig& rc = s.robots[i];
    robots.push_back(power_on(seeded_spec(rc, s.seed, i, static_cast<std::size_t>(trial))));
    Robot& robot = *robots.back();
    if (s.bounce.mode == control::DriveMode::kClosedLoop) {
      records[i] = calibrate(robot, s);
      runs[i].calibration = records[i];
    }
    if (rc.calibration_geometry) robot.set_geometry(rc.spec.geometry);
    Pose start;
    if (rc.start) {
      start = *rc.start;
    } else {
      // Keep drawing until the start is outside every target disc.
      do {
        start = {ux(placement), uy(placement), uyaw(placement)};
      } while (arena.target_at({start.x, start.y}) >= 0);
    }
    robot.place(arena, start.x, start.y, start.yaw);
  }
  // Synchronise clocks so all robots start searching together.
  double latest = 0.0;
  for (const auto& r : robots) latest = std::max(latest, r->time());
  for (auto& r : robots) {
    while (r->time() < latest - 1e-9) r->idle_ticks(1);
  }

  std::vector<bool> found(arena.targets.size(), false);
  std::deque<TrajectoryRecorder> recorders;
  std::vector<std::unique_ptr<control::WallBounceAgent>> agents;
  for (std::size_t i = 0; i < n; ++i) {
    runs[i].log.label = s.name + "_" + s.robots[i].name + "_t" + std::to_string(trial);
    recorders.emplace_back(runs[i].log);
    recorders.back().attach(*robots[i]);
    robots[i]->mark("trial_start:" + std::to_string(trial));
    const calib::CalibrationRecord* rec = records[i] ? &*records[i] : nullptr;
    agents.push_back(std::make_unique<control::WallBounceAgent>(
        *robots[i], rec, s.bounce.agent, derive_seed(s.seed, i, static_cast<std::uint64_t>(trial), 3),
        s.bounce.mode));
    agents.back()->set_target_filter([&found](int t) { return !found[static_cast<std::size_t>(t)]; });
  }
  const double t0 = latest;
  const auto all_found = [&] {
    for (bool f : found) {
      if (!f) return false;
    }
    return true;
  };
  while (!all_found() && robots.front()->time() - t0 < s.bounce.max_time) {
    for (std::size_t i = 0; i < n; ++i) {
      if (agents[i]->step() == control::BounceAction::kFound) {
        const int t = agents[i]->found_target();
        found[static_cast<std::size_t>(t)] = true;
        runs[i].metrics.target_found = t;
        runs[i].metrics.found_time = robots[i]->time() - t0;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    agents[i]->finish();
    robots[i]->mark("trial_end:" + std::to_string(trial));
    robots[i]->set_observer(nullptr);
    TrialMetrics& m = runs[i].metrics;
    m.robot = s.robots[i].name;
    m.trial = trial;
    m.speed = s.bounce.agent.speed;
    m.duration = robots[i]->time() - t0;
    m.segment_curvature = segment_curvature(runs[i].log);
  }
  return runs;
}

/// Runs every trial of a scenario, deterministic for a fixed seed.
inline ScenarioResult run_scenario(const Scenario& s) {
  s.validate();
  ScenarioResult out;
  out.report.scenario = s.name;
  out.report.family = to_string(s.family);
  if (s.family == Family::kWallBounce) {
    for (int t = 0; t < s.trials; ++t) {
      for (auto& run : run_wall_bounce(s, t)) out.runs.push_back(std::move(run));
    }
  } else {
    std::uint64_t key = 0;
    for (std::size_t r = 0; r < s.robots.size(); ++r) {
      for (double size : s.path.sizes) {
        for (double speed : s.path.speeds) {
          for (int t = 0; t < s.trials; ++t) {
            out.runs.push_back(run_path_trial(s, r, size, speed, t, key++));
          }
        }
      }
    }
  }
  for (const auto& run : out.runs) out.report.trials.push_back(run.metrics);
  out.report.summarise();
  return out;
}

}  // namespace diffcal::harness
