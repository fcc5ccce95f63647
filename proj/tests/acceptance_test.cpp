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

// Acceptance checks; prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

using namespace diffcal;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gyro_settles() {
  const auto t0 = Clock::now();
  auto robot = harness::power_on(RobotSpec{});
  const double settle = calib::settle_gyro(*robot);
  const double y0 = robot->gyro_yaw(), s0 = robot->time();
  robot->idle_ticks(robot->ticks_for(60.0));
  const double drift = std::abs(sensors::drift_rate(y0, s0, robot->gyro_yaw(), robot->time()));
  const double wall = seconds_since(t0);
  return {std::abs(settle - 23.0) <= 3.0 && drift < 0.5 && wall < 1.0,
          fmt("settled at %.2f s, static drift %.3f deg/min, wall %.3f s", settle, drift, wall)};
}

Outcome rangefinder_linearisation() {
  const auto f = sensors::fit_inverse(10.0, 2.32, 40.0, 0.70);
  const bool exact = std::abs(f.scale - 21.6) < 1e-9 && std::abs(f.offset - 0.16) < 1e-9;
  double worst = 0.0;
  for (const auto& unit : sensors::reference_sensor_batch()) {
    for (double d = 10.0; d <= 40.0 + 1e-9; d += 0.1) {
      const double v = sensors::rangefinder_clean_volts(unit, d);
      worst = std::max(worst, std::abs(sensors::volts_to_distance(f.scale, f.offset, v).raw - d));
    }
  }
  return {exact && worst <= 3.0,
          fmt("K=%.9f C=%.9f, worst spread error %.3f cm", f.scale, f.offset, worst)};
}

Outcome tuning_table() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ku(0.1, 500.0), tu(0.01, 20.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double k = ku(rng), t = tu(rng);
    const auto z = calib::zn_gains(k, t);
    const auto l = calib::tlc_gains(k, t);
    const double zkp = k / 1.7, zti = t / 2.0, ztd = t / 8.0;
    const double lkp = k / 2.2, lti = 2.2 * t, ltd = t / 6.3;
    for (double e : {z.kp - zkp, z.ki - zkp / zti, z.kd - zkp * ztd, l.kp - lkp,
                     l.ki - lkp / lti, l.kd - lkp * ltd}) {
      worst = std::max(worst, std::abs(e));
    }
  }
  return {worst <= 1e-9, fmt("worst gain error %.3g", worst)};
}

// 45 degree step with fixed gains over 4 s; overshoot in degrees and the
// 4th to 1st peak ratio.
std::pair<double, double> step_response(Robot& robot, const calib::CalibrationRecord& r,
                                        const calib::PidGains& g) {
  const double target = robot.gyro_yaw() + deg_to_rad(45.0);
  control::PidState pid;
  std::vector<double> t, e;
  double overshoot = 0.0;
  for (int i = 0; i < robot.ticks_for(4.0); ++i) {
    control::yaw_hold_tick(robot, r.motors, g, pid, target, 0.0);
    t.push_back(robot.time());
    e.push_back(target - robot.gyro_yaw());
    overshoot = std::max(overshoot, -e.back());
  }
  robot.idle_ticks(20);
  return {rad_to_deg(overshoot),
          calib::sustain_ratio(calib::find_peaks(t, e, deg_to_rad(0.1)))};
}

Outcome tuned_step() {
  std::unique_ptr<Robot> robot;
  const auto r = testing::calibrate_spec(RobotSpec{}, &robot).record;
  const auto [tuned_os, tuned_ratio] = step_response(*robot, r, r.pid);
  const auto [p_os, p_ratio] = step_response(*robot, r, {r.pid.ku / 1.5, 0, 0, 0, 0});
  return {tuned_os < p_os && tuned_ratio < 0.25,
          fmt("tuned overshoot %.2f deg ratio %.2f; P(Ku/1.5) overshoot %.2f deg ratio %.2f",
              tuned_os, tuned_ratio, p_os, p_ratio)};
}

Outcome calibration_duration() {
  const auto rep = testing::calibrate_spec(RobotSpec{});
  return {rep.duration >= 70.0 && rep.duration <= 120.0,
          fmt("%.1f s simulated", rep.duration)};
}

// Worst linear drift at speeds in [lo, hi].
double worst_linear(const harness::ScenarioResult& r, double lo, double hi) {
  double worst = 0.0;
  for (const auto& t : r.report.trials) {
    if (t.speed >= lo && t.speed <= hi) worst = std::max(worst, t.linear_drift);
  }
  return worst;
}

double worst_diameter(const harness::ScenarioResult& r, double lo, double hi) {
  double worst = 0.0;
  for (const auto& t : r.report.trials) {
    if (t.speed >= lo && t.speed <= hi) worst = std::max(worst, t.diameter_drift);
  }
  return worst;
}

Outcome squares() {
  const auto r = harness::run_scenario(harness::builtin_scenario("square_speed_sweep"));
  const double low = worst_linear(r, 2.0, 6.0), high = worst_linear(r, 6.0, 10.0);
  return {low <= 6.0 && high <= 9.0,
          fmt("worst linear drift %.2f cm/m at 2-6 cm/s, %.2f cm/m at 6-10 cm/s", low, high)};
}

Outcome circles() {
  const auto r = harness::run_scenario(harness::builtin_scenario("circle_speed_sweep"));
  const double low = worst_diameter(r, 2.0, 6.0), high = worst_diameter(r, 6.0, 10.0);
  return {low <= 7.0 && high <= 8.5,
          fmt("worst diameter drift %.2f cm/m at 2-6 cm/s, %.2f cm/m at 6-10 cm/s", low, high)};
}

Outcome repeat_line() {
  const auto r = harness::run_scenario(harness::builtin_scenario("gyro_drift_line"));
  return {r.report.rotational_drift.max <= 3.0,
          fmt("worst rotational drift %.2f deg/min over %d trials", r.report.rotational_drift.max,
              r.report.rotational_drift.count)};
}

Outcome miscalibration() {
  std::string detail;
  bool pass = true;
  // Wheel set B: both wheels 5% larger, or the built-in 6.0 / 6.9 pair.
  const std::vector<std::pair<double, double>> sets{{6.3, 6.3}, {6.0, 6.9}};
  for (const auto& [left, right] : sets) {
    harness::Scenario s = harness::builtin_scenario("miscalibration");
    s.robots[1].spec.geometry = plant::RobotGeometry::from_dimensions(left, right, 10.0);
    const auto r = harness::run_scenario(s);
    double matched_mean = 0.0, mis_mean = 0.0;
    int n = 0, m = 0;
    for (const auto& t : r.report.trials) {
      if (t.robot == "matched") {
        matched_mean += t.linear_drift;
        ++n;
      } else {
        mis_mean += t.linear_drift;
        ++m;
      }
    }
    matched_mean /= n;
    mis_mean /= m;
    pass = pass && mis_mean >= 2.0 * matched_mean;
    detail += fmt("%swheels %.1f/%.1f: matched %.2f cm/m, miscalibrated %.2f cm/m",
                  detail.empty() ? "" : "; ", left, right, matched_mean, mis_mean);
  }
  return {pass, detail};
}

Outcome determinism_and_store() {
  const auto t0 = Clock::now();
  harness::Scenario s = harness::builtin_scenario("squares");
  s.path.sizes = {30.0};
  s.trials = 1;
  const auto csv = [](const harness::ScenarioResult& r) {
    std::ostringstream out;
    for (const auto& run : r.runs) harness::write_csv(out, run.log);
    return out.str();
  };
  const auto a = harness::run_scenario(s);
  const auto b = harness::run_scenario(s);
  const bool same = csv(a) == csv(b);

  const fs::path p = fs::temp_directory_path() / "diffcal_acceptance.cal";
  const auto& rec = *a.runs.front().calibration;
  store::save_calibration(rec, p);
  const bool round_trip = store::load_calibration(p) == rec;
  std::string text;
  {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text[text.find('{') + 5] ^= 0x04;
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
  }
  bool detected = false;
  try {
    store::load_calibration(p);
  } catch (const store::StoreError& e) {
    detected = e.kind() == store::StoreError::Kind::kChecksum;
  }
  fs::remove(p);
  const double wall = seconds_since(t0);
  return {same && round_trip && detected && wall < 10.0,
          fmt("identical logs %s, round trip %s, corruption detected %s, wall %.2f s",
              same ? "yes" : "no", round_trip ? "yes" : "no", detected ? "yes" : "no", wall)};
}

Outcome exact_integrator() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> v(-10.0, 10.0), w(-3.0, 3.0), yaw(-kPi, kPi);
  plant::PlantState s{100.0, 100.0, yaw(rng), 0.0, false};
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double vi = v(rng), wi = w(rng);
    const auto exact = plant::integrate_twist(s, vi, wi, plant::kDefaultDt);
    const auto euler = testing::euler_oracle(s, vi, wi, plant::kDefaultDt);
    worst = std::max(worst, std::hypot(exact.x - euler.x, exact.y - euler.y));
    s = exact;
  }
  return {worst < 1e-6, fmt("worst per-step position error %.3g cm over 500 steps", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gyro settle", gyro_settles},
      {"rangefinder linearisation", rangefinder_linearisation},
      {"tuning table", tuning_table},
      {"tuned step response", tuned_step},
      {"calibration duration", calibration_duration},
      {"square linear drift", squares},
      {"circle diameter drift", circles},
      {"repeat line rotational drift", repeat_line},
      {"miscalibration drift", miscalibration},
      {"determinism and store", determinism_and_store},
      {"exact arc integrator", exact_integrator},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
