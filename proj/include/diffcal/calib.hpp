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

// The five-step self-calibration routine. It only reads the gyroscope and the
// rangefinder; the plant's true parameters are never consulted.
//
//   a. settle_gyro                 wait for the gyro's bias compensation
//   b. find_deadzone               per motor and direction
//   c. measure_max_rate            per motor and direction
//   d. find_ultimate_gain          heuristic P-only search, then TLC/ZN gains
//   e. calibrate_linear_velocity   wall approaches under yaw hold

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diffcal/control.hpp"
#include "diffcal/core.hpp"
#include "diffcal/records.hpp"
#include "diffcal/robot.hpp"
#include "diffcal/sensors.hpp"
#include "diffcal/stats.hpp"

namespace diffcal::calib {

class CalibrationError : public Error {
 public:
  enum class Kind {
    kTimeout,
    kMotorFault,
    kPlantTooDamped,
    kTuningFailure,
    kMeasurementFailure,
    kStepFailure,
  };

  CalibrationError(Kind kind, std::string step, const std::string& what)
      : Error(step + ": " + what), kind_(kind), step_(std::move(step)) {}

  Kind kind() const { return kind_; }
  /// Name of the failing step, e.g. "settle_gyro".
  const std::string& step() const { return step_; }

 private:
  Kind kind_;
  std::string step_;
};

struct CalibrationConfig {
  // a. gyro settling
  double settle_max_wait = 60.0;      // s
  double settle_window = 2.0;         // s, trailing slope window
  double settle_threshold = 0.5;      // deg/min
  // b. dead-zone sweep
  double sweep_step = 5.0;            // us
  double sweep_dwell = 0.25;          // s per step
  double sweep_max_offset = 500.0;    // us
  double perception_threshold = 0.05; // rad/s
  double perception_hold = 0.5;       // s
  // c. linear-region extremes
  double max_pwm_fwd = 1650.0;        // us
  double max_pwm_back = 1300.0;       // us
  double max_rate_window = 2.0;       // s
  double pause = 0.3;                 // s at neutral between measurements
  // d. auto-tune
  double perturbation = deg_to_rad(45.0);
  double saturation_error = deg_to_rad(1.0);  // error that commands the maximum
  double gain_divisor = 1.5;
  int max_reductions = 20;
  double sustain_ratio = 0.75;        // 4th / 1st peak amplitude
  double peak_hysteresis = deg_to_rad(0.1);
  int peaks_per_trial = 7;
  double trial_timeout = 5.0;         // s
  TuningRule rule = TuningRule::kTyreusLuyben;
  // e. velocity
  int approaches_per_direction = 4;
  double stop_distance = 12.0;        // cm, forward approach ends here
  double rangefinder_scale = 21.6;    // K
  double rangefinder_offset = 0.16;   // C
  sensors::Interval fit_range{10.0, 40.0};
  double band_exit_margin = 2.0;      // cm past the band edge
  int min_band_samples = 10;
  double approach_timeout = 15.0;     // s
  int max_consecutive_aborts = 3;
};

struct TraceEvent {
  double time = 0.0;  // s, simulated
  std::string step;
  std::string message;
};

using CalibrationTrace = std::vector<TraceEvent>;

namespace detail {

inline void trace(CalibrationTrace* t, const Robot& robot, std::string step, std::string msg) {
  if (t != nullptr) t->push_back({robot.time(), std::move(step), std::move(msg)});
}

inline std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

inline std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

inline void drive_motor(Robot& robot, Side side, double pwm) {
  if (side == Side::kLeft) {
    robot.tick(pwm, plant::kPwmNeutral);
  } else {
    robot.tick(plant::kPwmNeutral, pwm);
  }
}

/// Holds one motor at `pwm` for `ticks` ticks and returns the least-squares
/// slope of the gyro yaw over the ticks after the first `skip`.
inline double hold_and_measure(Robot& robot, Side side, double pwm, int ticks, int skip) {
  std::vector<double> t, y;
  t.reserve(static_cast<std::size_t>(ticks));
  y.reserve(static_cast<std::size_t>(ticks));
  for (int i = 0; i < ticks; ++i) {
    drive_motor(robot, side, pwm);
    if (i >= skip) {
      t.push_back(robot.time());
      y.push_back(robot.gyro_yaw());
    }
  }
  if (t.size() < 2) throw FitError("hold_and_measure: window too short");
  return stats::fit_line(t, y).slope;
}

inline int delay_skip(const Robot& robot) { return robot.spec().actuation_delay_ticks + 1; }

}  // namespace detail

/// a. Keeps the robot static until the trailing-window yaw slope is below the
/// threshold. Returns the time waited.
inline double settle_gyro(Robot& robot, const CalibrationConfig& cfg = {},
                          CalibrationTrace* trace = nullptr) {
  const double t0 = robot.time();
  std::vector<double> t{robot.time()}, y{robot.gyro_yaw()};
  detail::trace(trace, robot, "settle_gyro", "start");
  while (robot.time() - t0 < cfg.settle_max_wait + 1e-9) {
    robot.idle_ticks(1);
    t.push_back(robot.time());
    y.push_back(robot.gyro_yaw());
    while (t.back() - t.front() > cfg.settle_window + 1e-9) {
      t.erase(t.begin());
      y.erase(y.begin());
    }
    if (t.back() - t.front() < cfg.settle_window - 1e-9) continue;
    const double rate = sensors::rad_per_s_to_deg_per_min(stats::fit_line(t, y).slope);
    if (std::abs(rate) < cfg.settle_threshold) {
      const double elapsed = robot.time() - t0;
      detail::trace(trace, robot, "settle_gyro",
                    detail::fmt("settled after %.2f s, drift %.3f deg/min", elapsed, rate));
      return elapsed;
    }
  }
  throw CalibrationError(CalibrationError::Kind::kTimeout, "settle_gyro",
                         "drift still above threshold after max_wait");
}

struct DeadzoneProbe {
  double edge_pwm = 0.0;       // us, last imperceptible step (or one step off neutral)
  double perceived_pwm = 0.0;  // us, first step with confirmed rotation
  double perceived_rate = 0.0; // rad/s, rate measured over the confirmation hold
};

/// b. Sweeps one motor away from neutral until rotation is perceived and
/// confirmed over the hold time.
inline DeadzoneProbe probe_deadzone(Robot& robot, Side side, Direction dir,
                                    const CalibrationConfig& cfg = {},
                                    CalibrationTrace* trace = nullptr) {
  const std::string step = std::string("find_deadzone/") + to_string(side) + "/" + to_string(dir);
  const double sgn = sign_of(dir);
  const int dwell = robot.ticks_for(cfg.sweep_dwell);
  const int hold = robot.ticks_for(cfg.perception_hold);
  const int skip = std::min(detail::delay_skip(robot), dwell - 2);
  for (double off = cfg.sweep_step; off <= cfg.sweep_max_offset + 1e-9; off += cfg.sweep_step) {
    const double pwm = plant::kPwmNeutral + sgn * off;
    const double rate = detail::hold_and_measure(robot, side, pwm, dwell, skip);
    if (std::abs(rate) <= cfg.perception_threshold) continue;
    const double confirm = detail::hold_and_measure(robot, side, pwm, hold, 0);
    if (std::abs(confirm) <= cfg.perception_threshold) continue;
    robot.idle_ticks(robot.ticks_for(cfg.pause));
    DeadzoneProbe probe;
    probe.edge_pwm = plant::kPwmNeutral + sgn * std::max(off - cfg.sweep_step, cfg.sweep_step);
    probe.perceived_pwm = pwm;
    probe.perceived_rate = confirm;
    detail::trace(trace, robot, step,
                  detail::fmt("rotation at %.0f us, dead-zone edge %.0f us", pwm, probe.edge_pwm));
    return probe;
  }
  robot.idle_ticks(robot.ticks_for(cfg.pause));
  throw CalibrationError(CalibrationError::Kind::kMotorFault, step,
                         "no rotation perceived across the sweep range");
}

/// Returns the last imperceptible pulse width, never closer to neutral than
/// one sweep step.
inline double find_deadzone(Robot& robot, Side side, Direction dir,
                            const CalibrationConfig& cfg = {},
                            CalibrationTrace* trace = nullptr) {
  return probe_deadzone(robot, side, dir, cfg, trace).edge_pwm;
}

struct MaxRatePoint {
  double pwm = 0.0;   // us
  double rate = 0.0;  // rad/s, robot yaw rate
};

/// c. Runs one motor at the direction's linear-region extreme and measures the
/// resulting yaw rate from the gyro.
inline MaxRatePoint measure_max_rate(Robot& robot, Side side, Direction dir,
                                     const CalibrationConfig& cfg = {},
                                     CalibrationTrace* trace = nullptr) {
  const std::string step =
      std::string("measure_max_rate/") + to_string(side) + "/" + to_string(dir);
  const double pwm = dir == Direction::kForward ? cfg.max_pwm_fwd : cfg.max_pwm_back;
  const int skip = detail::delay_skip(robot);
  const double rate = detail::hold_and_measure(robot, side, pwm,
                                               skip + robot.ticks_for(cfg.max_rate_window), skip);
  robot.idle_ticks(robot.ticks_for(cfg.pause));
  detail::trace(trace, robot, step, detail::fmt("%.0f us -> %.4f rad/s", pwm, rate));
  if (std::abs(rate) >= kLinearRegionCeiling) {
    detail::trace(trace, robot, step, "warning: rate at or above the linear-region ceiling");
  }
  return {pwm, rate};
}

/// Pulse width where the line through the slowest perceived point and the
/// linear-region extreme reaches zero rate. Falls back to the sweep edge when
/// the two points do not give a usable line.
inline double effective_deadzone(const DeadzoneProbe& probe, const MaxRatePoint& max_point) {
  const double run = max_point.pwm - probe.perceived_pwm;
  const double rise = max_point.rate - probe.perceived_rate;
  if (run == 0.0 || !(rise / run > 0)) return probe.edge_pwm;
  const double zero = probe.perceived_pwm - probe.perceived_rate * run / rise;
  const double lo = std::min(plant::kPwmNeutral, probe.perceived_pwm);
  const double hi = std::max(plant::kPwmNeutral, probe.perceived_pwm);
  return std::clamp(zero, lo, hi);
}

/// b + c for all four motor directions. Each motor runs forward then backward
/// so the single-wheel pivots cancel. Each map is the line between the
/// slowest perceived rotation and the linear-region extreme.
inline MotorCalibration calibrate_motors(Robot& robot, const CalibrationConfig& cfg = {},
                                         CalibrationTrace* trace = nullptr) {
  MotorCalibration m;
  for (Side side : {Side::kLeft, Side::kRight}) {
    const DeadzoneProbe dz_f = probe_deadzone(robot, side, Direction::kForward, cfg, trace);
    const DeadzoneProbe dz_b = probe_deadzone(robot, side, Direction::kBackward, cfg, trace);
    const MaxRatePoint mx_f = measure_max_rate(robot, side, Direction::kForward, cfg, trace);
    const MaxRatePoint mx_b = measure_max_rate(robot, side, Direction::kBackward, cfg, trace);
    try {
      m.fit(side, Direction::kForward) =
          fit_motor_map(effective_deadzone(dz_f, mx_f), mx_f.pwm, mx_f.rate);
      m.fit(side, Direction::kBackward) =
          fit_motor_map(effective_deadzone(dz_b, mx_b), mx_b.pwm, mx_b.rate);
    } catch (const FitError& e) {
      throw CalibrationError(CalibrationError::Kind::kMotorFault,
                             std::string("fit_motor_map/") + to_string(side), e.what());
    }
  }
  return m;
}

struct Peak {
  double time = 0.0;       // s
  double amplitude = 0.0;  // rad, signed error at the extremum
};

/// Alternating extrema of an error signal, found with hysteresis after its
/// first zero crossing.
inline std::vector<Peak> find_peaks(const std::vector<double>& t, const std::vector<double>& e,
                                    double hysteresis) {
  std::vector<Peak> peaks;
  if (t.size() != e.size() || e.empty()) return peaks;
  const double initial = e.front();
  std::size_t i = 0;
  while (i < e.size() && (initial >= 0 ? e[i] > 0 : e[i] < 0)) ++i;
  if (i >= e.size()) return peaks;
  double sign = initial >= 0 ? -1.0 : 1.0;
  Peak cand{t[i], e[i]};
  for (; i < e.size(); ++i) {
    if (sign * e[i] > sign * cand.amplitude) {
      cand = {t[i], e[i]};
    } else if (sign * (cand.amplitude - e[i]) > hysteresis) {
      if (sign * cand.amplitude > hysteresis) peaks.push_back(cand);
      sign = -sign;
      cand = {t[i], e[i]};
    }
  }
  return peaks;
}

/// Ratio of the 4th to the 1st peak amplitude; 0 with fewer than 4 peaks.
inline double sustain_ratio(const std::vector<Peak>& peaks) {
  if (peaks.size() < 4 || peaks[0].amplitude == 0.0) return 0.0;
  return std::abs(peaks[3].amplitude) / std::abs(peaks[0].amplitude);
}

/// Mean of the last (up to) 3 full periods, measured between same-sign peaks.
inline double oscillation_period(const std::vector<Peak>& peaks) {
  if (peaks.size() < 3) return 0.0;
  std::vector<double> periods;
  for (std::size_t i = 2; i < peaks.size(); ++i) periods.push_back(peaks[i].time - peaks[i - 2].time);
  const std::size_t n = std::min<std::size_t>(3, periods.size());
  return stats::mean(std::span<const double>(periods).last(n));
}

struct TuningTrial {
  double kp = 0.0;
  double target = 0.0;  // rad, gyro frame
  std::vector<Peak> peaks;
  double ratio = 0.0;
  bool sustained = false;
  double period = 0.0;  // s
};

/// One proportional-only trial towards `target`.
inline TuningTrial run_p_trial(Robot& robot, const MotorCalibration& motors, double kp,
                               double target, const CalibrationConfig& cfg) {
  TuningTrial trial;
  trial.kp = kp;
  trial.target = target;
  const PidGains p{kp, 0.0, 0.0, 0.0, 0.0};
  control::PidState pid;
  std::vector<double> t, e;
  const int ticks = robot.ticks_for(cfg.trial_timeout);
  for (int i = 0; i < ticks; ++i) {
    control::yaw_hold_tick(robot, motors, p, pid, target, 0.0);
    t.push_back(robot.time());
    e.push_back(wrap_angle(target - robot.gyro_yaw()));
    if (i % 10 == 9 &&
        find_peaks(t, e, cfg.peak_hysteresis).size() >=
            static_cast<std::size_t>(cfg.peaks_per_trial)) {
      break;
    }
  }
  robot.idle_ticks(robot.ticks_for(cfg.pause));
  trial.peaks = find_peaks(t, e, cfg.peak_hysteresis);
  trial.ratio = sustain_ratio(trial.peaks);
  trial.sustained = trial.ratio > cfg.sustain_ratio;
  trial.period = oscillation_period(trial.peaks);
  return trial;
}

struct UltimateGain {
  double ku = 0.0;
  double tu = 0.0;  // s
  std::vector<TuningTrial> trials;
};

/// Proportional gain that commands the maximum rotation at the saturation
/// error; the auto-tune starts here.
inline double initial_gain(const MotorCalibration& motors, const CalibrationConfig& cfg = {}) {
  return motors.max_rotation_command() / cfg.saturation_error;
}

/// d. Starts from the gain that saturates the output at 1 degree of error and
/// divides it while the oscillation stays self-sustained. Targets alternate
/// between +45 degrees and the starting heading.
inline UltimateGain find_ultimate_gain(Robot& robot, const MotorCalibration& motors,
                                       const CalibrationConfig& cfg = {},
                                       CalibrationTrace* trace = nullptr) {
  const std::string step = "find_ultimate_gain";
  if (!motors.complete()) {
    throw CalibrationError(CalibrationError::Kind::kStepFailure, step, "motor map incomplete");
  }
  UltimateGain out;
  const double ref = robot.gyro_yaw();
  double kp = initial_gain(motors, cfg);
  for (int n = 0; n <= cfg.max_reductions; ++n) {
    const double target = n % 2 == 0 ? ref + cfg.perturbation : ref;
    TuningTrial trial = run_p_trial(robot, motors, kp, target, cfg);
    detail::trace(trace, robot, step,
                  detail::fmt("Kp %.4f peak ratio %.3f", trial.kp, trial.ratio) +
                      (trial.sustained ? " sustained" : " attenuated"));
    out.trials.push_back(trial);
    if (trial.sustained) {
      kp /= cfg.gain_divisor;
      continue;
    }
    if (n == 0) {
      throw CalibrationError(CalibrationError::Kind::kPlantTooDamped, step,
                             "no sustained oscillation at the initial gain");
    }
    const TuningTrial& last = out.trials[out.trials.size() - 2];
    out.ku = last.kp;
    out.tu = last.period;
    if (!(out.tu > 0)) {
      throw CalibrationError(CalibrationError::Kind::kTuningFailure, step,
                             "ultimate period not measurable");
    }
    detail::trace(trace, robot, step, detail::fmt("Ku %.4f Tu %.4f s", out.ku, out.tu));
    return out;
  }
  throw CalibrationError(CalibrationError::Kind::kTuningFailure, step,
                         "oscillation still sustained after the maximum number of reductions");
}

/// One wall approach (direction forward) or retreat (backward) at the
/// straight command `omega_c` holding `yaw`. Returns the measured speed, or
/// nothing when the measurement must be repeated.
inline std::optional<double> measure_approach(Robot& robot, const MotorCalibration& motors,
                                              const PidGains& gains, double yaw, double omega_c,
                                              Direction dir, const CalibrationConfig& cfg) {
  const double s = sign_of(dir);
  control::PidState pid;
  std::vector<double> t, d;
  bool entered = false;
  bool ok = false;
  const int ticks = robot.ticks_for(cfg.approach_timeout);
  for (int i = 0; i < ticks; ++i) {
    control::yaw_hold_tick(robot, motors, gains, pid, yaw, s * omega_c);
    if (robot.wall_contact()) break;
    const double v = robot.range_volts();
    if (!(v > cfg.rangefinder_offset)) {
      if (dir == Direction::kForward) break;
      continue;
    }
    const auto lin = sensors::volts_to_distance(cfg.rangefinder_scale, cfg.rangefinder_offset, v,
                                                cfg.fit_range);
    if (lin.in_band) {
      entered = true;
      t.push_back(robot.time());
      d.push_back(lin.raw);
    }
    if (dir == Direction::kForward) {
      if (lin.raw <= cfg.stop_distance) {
        ok = true;
        break;
      }
      if (entered && lin.raw > cfg.fit_range.hi + cfg.band_exit_margin) break;
    } else if (entered && lin.raw > cfg.fit_range.hi + cfg.band_exit_margin) {
      ok = true;
      break;
    }
  }
  robot.idle_ticks(robot.ticks_for(cfg.pause));
  if (!ok || t.size() < static_cast<std::size_t>(cfg.min_band_samples)) return std::nullopt;
  return std::abs(stats::fit_line(t, d).slope);
}

/// e. Alternates forward approaches and backward retreats in front of the
/// wall, holding the wall-facing heading `yaw`. The map is anchored at zero.
inline VelocityMap calibrate_linear_velocity(Robot& robot, const MotorCalibration& motors,
                                             const PidGains& gains, double yaw,
                                             const CalibrationConfig& cfg = {},
                                             CalibrationTrace* trace = nullptr) {
  const std::string step = "calibrate_linear_velocity";
  const double omega_c = motors.min_linear_extreme();
  std::vector<double> fwd, back;
  int aborts = 0;
  while (static_cast<int>(back.size()) < cfg.approaches_per_direction) {
    const Direction dir = fwd.size() > back.size() ? Direction::kBackward : Direction::kForward;
    const auto speed = measure_approach(robot, motors, gains, yaw, omega_c, dir, cfg);
    if (!speed) {
      ++aborts;
      detail::trace(trace, robot, step, std::string(to_string(dir)) + " measurement aborted");
      if (aborts >= cfg.max_consecutive_aborts) {
        throw CalibrationError(CalibrationError::Kind::kMeasurementFailure, step,
                               "too many consecutive aborted wall measurements");
      }
      if (dir == Direction::kForward) {
        // Back off so the next approach starts outside the band.
        measure_approach(robot, motors, gains, yaw, omega_c, Direction::kBackward, cfg);
      }
      continue;
    }
    aborts = 0;
    (dir == Direction::kForward ? fwd : back).push_back(*speed);
    detail::trace(trace, robot, step,
                  std::string(to_string(dir)) + detail::fmt(" speed %.4f cm/s", *speed));
  }
  VelocityMap map;
  map.max_command = omega_c;
  map.slope_fwd = stats::mean(fwd) / omega_c;
  map.slope_back = stats::mean(back) / omega_c;
  detail::trace(trace, robot, step,
                detail::fmt("slope fwd %.4f back %.4f (cm/s)/(rad/s)", map.slope_fwd,
                            map.slope_back));
  return map;
}

struct CalibrationReport {
  CalibrationRecord record;
  UltimateGain tuning;
  CalibrationTrace trace;
  double duration = 0.0;  // s, simulated
};

/// Full routine a-e. The robot must start static, facing a wall from outside
/// the rangefinder's fit band.
inline CalibrationReport run_full_calibration(Robot& robot, const CalibrationConfig& cfg = {}) {
  CalibrationReport rep;
  const double t0 = robot.time();
  const auto guarded = [&](const char* step, auto&& fn) {
    try {
      return fn();
    } catch (const CalibrationError&) {
      throw;
    } catch (const Error& e) {
      throw CalibrationError(CalibrationError::Kind::kStepFailure, step, e.what());
    }
  };
  rep.record.gyro_settle_time =
      guarded("settle_gyro", [&] { return settle_gyro(robot, cfg, &rep.trace); });
  const double wall_yaw = robot.gyro_yaw();
  rep.record.motors =
      guarded("calibrate_motors", [&] { return calibrate_motors(robot, cfg, &rep.trace); });
  rep.tuning = guarded("find_ultimate_gain", [&] {
    return find_ultimate_gain(robot, rep.record.motors, cfg, &rep.trace);
  });
  rep.record.pid = tuning_gains(cfg.rule, rep.tuning.ku, rep.tuning.tu);
  detail::trace(&rep.trace, robot, "tuning_gains",
                detail::fmt("Kp %.4f Ki %.4f", rep.record.pid.kp, rep.record.pid.ki) +
                    detail::fmt(" Kd %.4f", rep.record.pid.kd));
  guarded("realign", [&] {
    control::rotate_in_place(robot, rep.record.motors, rep.record.pid, wall_yaw);
    return 0;
  });
  rep.record.velocity = guarded("calibrate_linear_velocity", [&] {
    return calibrate_linear_velocity(robot, rep.record.motors, rep.record.pid, wall_yaw, cfg,
                                     &rep.trace);
  });
  rep.record.created_at = robot.time();
  rep.duration = robot.time() - t0;
  detail::trace(&rep.trace, robot, "done", detail::fmt("duration %.2f s", rep.duration));
  return rep;
}

struct SweepPoint {
  double pwm = 0.0;   // us
  double rate = 0.0;  // rad/s
};

/// Diagnostic full-range characterisation of one motor: every `step` us from
/// 1000 to 2000 with a configurable dwell. Not part of the routine.
inline std::vector<SweepPoint> sweep_motor(Robot& robot, Side side, double step = 10.0,
                                           double dwell = 0.3) {
  if (!(step > 0)) throw DomainError("sweep_motor: step must be > 0");
  std::vector<SweepPoint> out;
  const int ticks = robot.ticks_for(dwell);
  const int skip = std::min(detail::delay_skip(robot), ticks - 2);
  if (ticks - skip < 2) throw DomainError("sweep_motor: dwell too short");
  for (double pwm = plant::kPwmMin; pwm <= plant::kPwmMax + 1e-9; pwm += step) {
    out.push_back({pwm, detail::hold_and_measure(robot, side, pwm, ticks, skip)});
  }
  robot.idle_ticks(1);
  return out;
}

}  // namespace diffcal::calib
