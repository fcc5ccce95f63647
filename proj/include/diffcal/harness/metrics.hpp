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

// Drift metrics over trajectory logs. Linear drift is the largest deviation
// between achieved and nominal key points, in cm per metre of the path's
// scale length; rotational drift is the slope of segment heading over time.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffcal/core.hpp"
#include "diffcal/harness/trajectory.hpp"
#include "diffcal/sensors.hpp"
#include "diffcal/stats.hpp"

namespace diffcal::harness {

/// Key points of a nominal path in the aligned frame (start at the origin,
/// initial heading along +x) and the length drift is normalised by.
struct NominalPath {
  std::vector<Vec2> key_points;
  double scale_length = 0.0;  // cm
};

/// Square of side `side`; `turn` is +1 for clockwise corners, -1 otherwise.
inline NominalPath nominal_square(double side, double turn = 1.0) {
  if (!(side > 0)) throw DomainError("nominal_square: side must be > 0");
  NominalPath p;
  p.scale_length = side;
  Vec2 at{0, 0};
  p.key_points.push_back(at);
  for (int k = 0; k < 4; ++k) {
    at = at + side * heading_vector(turn * k * 0.5 * kPi);
    p.key_points.push_back(k == 3 ? Vec2{0, 0} : at);
  }
  return p;
}

/// Back-and-forth line of `segments` legs of `length`.
inline NominalPath nominal_line(double length, int segments) {
  if (!(length > 0) || segments < 1) throw DomainError("nominal_line: bad length or count");
  NominalPath p;
  p.scale_length = length;
  for (int k = 0; k <= segments; ++k) p.key_points.push_back({k % 2 == 0 ? 0.0 : length, 0.0});
  return p;
}

/// A full circle starts and ends at the origin.
inline NominalPath nominal_circle(double diameter) {
  if (!(diameter > 0)) throw DomainError("nominal_circle: diameter must be > 0");
  return {{Vec2{0, 0}, Vec2{0, 0}}, diameter};
}

/// Rigid transform of one log so its first sample is at the origin with zero
/// yaw.
inline TrajectoryLog align_trial(const TrajectoryLog& log) {
  TrajectoryLog out = log;
  if (log.samples.empty()) return out;
  const Vec2 origin = log.samples.front().position();
  const double yaw0 = log.samples.front().yaw;
  for (auto& s : out.samples) {
    const Vec2 p = rotate_cw(s.position() - origin, -yaw0);
    s.x = p.x;
    s.y = p.y;
    s.yaw -= yaw0;
  }
  return out;
}

inline std::vector<TrajectoryLog> align_trials(const std::vector<TrajectoryLog>& logs) {
  std::vector<TrajectoryLog> out;
  out.reserve(logs.size());
  for (const auto& l : logs) out.push_back(align_trial(l));
  return out;
}

/// Sample index ranges [start, end] between segment_start / segment_end.
inline std::vector<std::pair<std::size_t, std::size_t>> segments(const TrajectoryLog& log) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t open = 0;
  bool is_open = false;
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const auto& s = log.samples[i];
    // A sample can close one segment and open the next.
    if (is_open && s.has_event("segment_end")) {
      out.emplace_back(open, i);
      is_open = false;
    }
    if (s.has_event("segment_start")) {
      open = i;
      is_open = true;
    }
  }
  return out;
}

/// First sample position followed by the position at every segment end.
inline std::vector<Vec2> achieved_key_points(const TrajectoryLog& log) {
  std::vector<Vec2> out;
  if (log.samples.empty()) return out;
  out.push_back(log.samples.front().position());
  for (const auto& [a, b] : segments(log)) out.push_back(log.samples[b].position());
  return out;
}

/// Largest key-point deviation per metre of the nominal scale length, cm/m.
inline double linear_drift(const TrajectoryLog& log, const NominalPath& nominal) {
  if (!(nominal.scale_length > 0)) throw MetricError("linear_drift: nominal scale must be > 0");
  const auto achieved = achieved_key_points(log);
  if (achieved.size() < nominal.key_points.size()) {
    throw MetricError("linear_drift: log does not cover the nominal path");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < nominal.key_points.size(); ++k) {
    worst = std::max(worst, (achieved[k] - nominal.key_points[k]).norm());
  }
  return worst / (nominal.scale_length / 100.0);
}

/// Heading drift over repeated back-and-forth segments, deg/min (magnitude).
/// Segment headings are folded modulo pi so opposite legs compare directly.
inline double rotational_drift(const TrajectoryLog& log) {
  const auto segs = segments(log);
  if (segs.size() < 3) throw MetricError("rotational_drift: need at least 3 segments");
  std::vector<double> times, headings;
  double previous = 0.0;
  for (const auto& [a, b] : segs) {
    std::vector<Vec2> pts;
    for (std::size_t i = a; i <= b; ++i) pts.push_back(log.samples[i].position());
    double h = yaw_of(stats::principal_direction(pts));
    if (!headings.empty()) {
      while (h - previous > 0.5 * kPi) h -= kPi;
      while (h - previous < -0.5 * kPi) h += kPi;
    }
    previous = h;
    headings.push_back(h);
    times.push_back(0.5 * (log.samples[a].time + log.samples[b].time));
  }
  return std::abs(sensors::rad_per_s_to_deg_per_min(stats::fit_line(times, headings).slope));
}

/// Largest pairwise distance between samples [first, last].
inline double max_pairwise_distance(const TrajectoryLog& log, std::size_t first,
                                    std::size_t last) {
  if (last >= log.samples.size() || first > last) throw MetricError("bad sample range");
  double best = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    for (std::size_t j = i + 1; j <= last; ++j) {
      best = std::max(best, (log.samples[i].position() - log.samples[j].position()).norm());
    }
  }
  return best;
}

/// Diameter of the first complete circle segment in the log.
inline double circle_diameter(const TrajectoryLog& log) {
  const auto segs = segments(log);
  if (segs.empty()) throw MetricError("circle_diameter: no complete segment");
  return max_pairwise_distance(log, segs.front().first, segs.front().second);
}

/// Diameter error per metre of nominal diameter, cm/m.
inline double diameter_drift(double measured, double nominal) {
  if (!(nominal > 0)) throw MetricError("diameter_drift: nominal must be > 0");
  return std::abs(measured - nominal) / (nominal / 100.0);
}

/// Mean heading change per metre driven over the log's segments, deg/m.
/// Straight travel scores 0. Segments shorter than `min_length` are skipped;
/// returns 0 when none qualify.
inline double segment_curvature(const TrajectoryLog& log, double min_length = 10.0) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [a, b] : segments(log)) {
    double length = 0.0;
    for (std::size_t i = a + 1; i <= b; ++i) {
      length += (log.samples[i].position() - log.samples[i - 1].position()).norm();
    }
    if (length < min_length) continue;
    const double turn = std::abs(log.samples[b].yaw - log.samples[a].yaw);
    sum += rad_to_deg(turn) / (length / 100.0);
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

struct TrialMetrics {
  std::string robot;
  int trial = 0;
  double size = 0.0;   // cm, side / diameter / leg length
  double speed = 0.0;  // cm/s
  double duration = 0.0;  // s
  double linear_drift = 0.0;      // cm/m
  double diameter = 0.0;          // cm, circles only
  double diameter_drift = 0.0;    // cm/m, circles only
  double rotational_drift = 0.0;  // deg/min, repeat lines only
  double segment_curvature = 0.0; // deg/m, wall bounce only
  int target_found = -1;          // wall bounce only
  double found_time = 0.0;        // s, wall bounce only
};

struct Aggregate {
  double mean = 0.0;
  double max = 0.0;
  int count = 0;
};

inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<int>(values.size());
  if (values.empty()) return a;
  a.mean = stats::mean(values);
  a.max = *std::max_element(values.begin(), values.end());
  return a;
}

struct DriftReport {
  std::string scenario;
  std::string family;
  std::vector<TrialMetrics> trials;
  Aggregate linear_drift;
  Aggregate diameter_drift;
  Aggregate rotational_drift;
  Aggregate segment_curvature;

  /// Recomputes the aggregates from the per-trial values.
  void summarise() {
    std::vector<double> lin, dia, rot, bow;
    for (const auto& t : trials) {
      lin.push_back(t.linear_drift);
      if (family == "circles") dia.push_back(t.diameter_drift);
      if (family == "repeat_line") rot.push_back(t.rotational_drift);
      if (family == "wall_bounce") bow.push_back(t.segment_curvature);
    }
    linear_drift = aggregate(lin);
    diameter_drift = aggregate(dia);
    rotational_drift = aggregate(rot);
    segment_curvature = aggregate(bow);
  }
};

inline nlohmann::json to_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"max", a.max}, {"count", a.count}};
}

inline nlohmann::json to_json(const DriftReport& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"robot", t.robot},
                      {"trial", t.trial},
                      {"size_cm", t.size},
                      {"speed_cm_s", t.speed},
                      {"duration_s", t.duration},
                      {"linear_drift_cm_m", t.linear_drift},
                      {"diameter_cm", t.diameter},
                      {"diameter_drift_cm_m", t.diameter_drift},
                      {"rotational_drift_deg_min", t.rotational_drift},
                      {"segment_curvature_deg_m", t.segment_curvature},
                      {"target_found", t.target_found},
                      {"found_time_s", t.found_time}});
  }
  return {{"scenario", r.scenario},
          {"family", r.family},
          {"trials", trials},
          {"linear_drift_cm_m", to_json(r.linear_drift)},
          {"diameter_drift_cm_m", to_json(r.diameter_drift)},
          {"rotational_drift_deg_min", to_json(r.rotational_drift)},
          {"segment_curvature_deg_m", to_json(r.segment_curvature)}};
}

}  // namespace diffcal::harness
