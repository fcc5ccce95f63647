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

// Timestamped pose logs, recorded at the control rate, with event markers
// attached to the sample at which they occurred.

#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffcal/core.hpp"
#include "diffcal/robot.hpp"

namespace diffcal::harness {

struct PoseSample {
  double time = 0.0;  // s
  double x = 0.0;     // cm
  double y = 0.0;     // cm
  double yaw = 0.0;   // rad, clockwise positive
  std::vector<std::string> events;

  Vec2 position() const { return {x, y}; }
  bool has_event(std::string_view e) const {
    for (const auto& s : events) {
      if (s == e) return true;
    }
    return false;
  }
};

struct TrajectoryLog {
  std::string label;
  bool ground_truth = true;
  std::vector<PoseSample> samples;

  bool empty() const { return samples.empty(); }
  /// Indices of samples carrying event `e`.
  std::vector<std::size_t> find_events(std::string_view e) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].has_event(e)) out.push_back(i);
    }
    return out;
  }
};

/// Appends one sample per control tick of the observed robot.
class TrajectoryRecorder : public RobotObserver {
 public:
  explicit TrajectoryRecorder(TrajectoryLog& log) : log_(log) {}

  /// Records the robot's current pose as the first sample and starts
  /// observing it.
  void attach(Robot& robot) {
    push(robot);
    robot.set_observer(this);
  }

  void on_tick(const Robot& robot) override { push(robot); }

  void on_event(const Robot& robot, std::string_view event) override {
    if (log_.samples.empty()) push(robot);
    log_.samples.back().events.emplace_back(event);
  }

 private:
  void push(const Robot& robot) {
    const auto& s = robot.truth();
    if (!log_.samples.empty() && log_.samples.back().time == s.time) {
      auto& last = log_.samples.back();
      last.x = s.x;
      last.y = s.y;
      last.yaw = s.yaw;
      return;
    }
    log_.samples.push_back({s.time, s.x, s.y, s.yaw, {}});
  }

  TrajectoryLog& log_;
};

inline constexpr const char* kCsvHeader = "time_s,x_cm,y_cm,yaw_rad,event";

inline std::string join_events(const std::vector<std::string>& events) {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ';';
    out += e;
  }
  return out;
}

/// Fixed-format CSV; byte-identical for identical logs.
inline void write_csv(std::ostream& out, const TrajectoryLog& log) {
  out << kCsvHeader << '\n';
  char buf[160];
  for (const auto& s : log.samples) {
    std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.6f,%.9f,", s.time, s.x, s.y, s.yaw);
    out << buf << join_events(s.events) << '\n';
  }
}

inline nlohmann::json log_to_json(const TrajectoryLog& log) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : log.samples) {
    nlohmann::json row = {{"time_s", s.time}, {"x_cm", s.x}, {"y_cm", s.y}, {"yaw_rad", s.yaw}};
    if (!s.events.empty()) row["events"] = s.events;
    samples.push_back(std::move(row));
  }
  return {{"label", log.label}, {"ground_truth", log.ground_truth}, {"samples", samples}};
}

}  // namespace diffcal::harness
