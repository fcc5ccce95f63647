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

// Imperfect sensor models: a MEMS gyroscope whose on-chip processor needs a
// static settling period before its bias is compensated, and an IR
// rangefinder with an inverse distance/voltage response.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "diffcal/core.hpp"

namespace diffcal::sensors {

/// Converts deg/min to rad/s.
constexpr double deg_per_min_to_rad_per_s(double d) { return deg_to_rad(d) / 60.0; }
constexpr double rad_per_s_to_deg_per_min(double r) { return rad_to_deg(r) * 60.0; }

struct GyroModel {
  double settle_duration = 23.0;          // s
  double static_bias_prefit = 0.0015;     // rad/s, before on-chip compensation
  double residual_static_drift = 0.2;     // deg/min, settled and static
  double moving_drift = 1.5;              // deg/min, settled and moving
  double noise_sigma = 1e-4;              // rad, white noise on each reading
  std::uint64_t seed = 1;

  void validate() const {
    if (!(settle_duration >= 0)) throw DomainError("GyroModel: settle_duration must be >= 0");
    if (!(noise_sigma >= 0)) throw DomainError("GyroModel: noise_sigma must be >= 0");
    const double prefit = std::abs(rad_per_s_to_deg_per_min(static_bias_prefit));
    if (static_bias_prefit != 0.0 && !(std::abs(residual_static_drift) < prefit)) {
      throw DomainError("GyroModel: residual drift must be below the uncompensated bias");
    }
  }

  friend bool operator==(const GyroModel&, const GyroModel&) = default;
};

/// A gyroscope with no drift and no noise.
inline GyroModel ideal_gyro() {
  GyroModel m;
  m.settle_duration = 0.0;
  m.static_bias_prefit = 0.0;
  m.residual_static_drift = 0.0;
  m.moving_drift = 0.0;
  m.noise_sigma = 0.0;
  return m;
}

struct GyroState {
  bool settled = false;
  double settle_start_time = 0.0;  // s, power-on
  double bias_estimate = 0.0;      // rad/s currently uncompensated
  double accumulated_error = 0.0;  // rad, integrated bias so far
  double last_time = 0.0;          // s
};

/// Advances the drift integral to `time` and returns the measured yaw.
/// Settling is a hard switch once settle_duration has elapsed since power-on;
/// an interval straddling the switch is split exactly.
template <class Rng>
double gyro_sample(const GyroModel& model, GyroState& state, double true_yaw, double time,
                   bool moving, Rng& rng) {
  if (time < state.settle_start_time) {
    throw DomainError("gyro_sample: time precedes power-on");
  }
  const double settle_at = state.settle_start_time + model.settle_duration;
  const double settled_rate = deg_per_min_to_rad_per_s(moving ? model.moving_drift
                                                              : model.residual_static_drift);
  double t = std::max(state.last_time, state.settle_start_time);
  if (time > t) {
    if (t < settle_at) {
      const double pre_end = std::min(time, settle_at);
      state.accumulated_error += model.static_bias_prefit * (pre_end - t);
      t = pre_end;
    }
    if (time > t) state.accumulated_error += settled_rate * (time - t);
    state.last_time = time;
  }
  state.settled = time >= settle_at;
  state.bias_estimate = state.settled ? settled_rate : model.static_bias_prefit;
  double reading = true_yaw + state.accumulated_error;
  if (model.noise_sigma > 0.0) {
    reading += std::normal_distribution<double>(0.0, model.noise_sigma)(rng);
  }
  return reading;
}

/// Owns a gyro model, its evolving state and its noise stream.
class Gyro {
 public:
  explicit Gyro(GyroModel model, double power_on_time = 0.0)
      : model_(model), rng_(model.seed) {
    model_.validate();
    state_.settle_start_time = power_on_time;
    state_.last_time = power_on_time;
  }

  double sample(double true_yaw, double time, bool moving) {
    return gyro_sample(model_, state_, true_yaw, time, moving, rng_);
  }

  const GyroModel& model() const { return model_; }
  const GyroState& state() const { return state_; }

 private:
  GyroModel model_;
  GyroState state_;
  std::mt19937_64 rng_;
};

/// Yaw drift rate in deg/min from two timed yaw readings (rad).
inline double drift_rate(double yaw1, double t1, double yaw2, double t2) {
  if (!(t2 > t1)) throw DomainError("drift_rate: t2 must be after t1");
  return (yaw2 - yaw1) / (t2 - t1) * (180.0 / kPi) * 60.0;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(Interval, Interval) = default;
};

struct RangefinderModel {
  double scale = 21.6;   // K, V*cm
  double offset = 0.16;  // C, V
  Interval valid_range{10.0, 80.0};
  Interval fit_range{10.0, 40.0};
  double noise_sigma = 0.004;  // V
  std::uint64_t seed = 2;

  void validate() const {
    if (!(scale > 0)) throw DomainError("RangefinderModel: scale must be > 0");
    if (!(offset >= 0)) throw DomainError("RangefinderModel: offset must be >= 0");
    if (!(noise_sigma >= 0)) throw DomainError("RangefinderModel: noise_sigma must be >= 0");
    if (!(valid_range.lo > 0 && valid_range.lo < valid_range.hi &&
          fit_range.lo >= valid_range.lo && fit_range.hi <= valid_range.hi &&
          fit_range.lo < fit_range.hi)) {
      throw DomainError("RangefinderModel: fit_range must lie inside valid_range");
    }
  }

  friend bool operator==(const RangefinderModel&, const RangefinderModel&) = default;
};

/// Noise-free sensor response. Inverse law inside the rated range, flat above
/// it, and a linear ramp from 0 V at contact up to the 10 cm value below it.
inline double rangefinder_clean_volts(const RangefinderModel& m, double d) {
  const auto law = [&](double x) { return m.scale / x + m.offset; };
  if (d > m.valid_range.hi) return law(m.valid_range.hi);
  if (d < m.valid_range.lo) return law(m.valid_range.lo) * d / m.valid_range.lo;
  return law(d);
}

template <class Rng>
double rangefinder_volts(const RangefinderModel& m, double true_distance, Rng& rng) {
  if (!(true_distance > 0)) throw DomainError("rangefinder_volts: distance must be > 0");
  double v = rangefinder_clean_volts(m, true_distance);
  if (m.noise_sigma > 0.0) v += std::normal_distribution<double>(0.0, m.noise_sigma)(rng);
  return v;
}

class Rangefinder {
 public:
  explicit Rangefinder(RangefinderModel model) : model_(model), rng_(model.seed) {
    model_.validate();
  }

  /// Distances at or below zero (robot pressed against the wall) read 0 V.
  double read(double true_distance) {
    if (true_distance <= 0.0) return 0.0;
    return rangefinder_volts(model_, true_distance, rng_);
  }

  const RangefinderModel& model() const { return model_; }

 private:
  RangefinderModel model_;
  std::mt19937_64 rng_;
};

/// Three production units of the same rangefinder part, spread around the
/// nominal K = 21.6 V*cm, C = 0.16 V curve.
inline std::array<RangefinderModel, 3> reference_sensor_batch() {
  std::array<RangefinderModel, 3> batch;
  batch[0].scale = 21.6 * 0.96;
  batch[0].offset = 0.17;
  batch[1].scale = 21.6;
  batch[1].offset = 0.16;
  batch[2].scale = 21.6 * 1.04;
  batch[2].offset = 0.15;
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i].seed = 100 + i;
  return batch;
}

struct InverseFit {
  double scale = 0.0;   // K
  double offset = 0.0;  // C
};

/// Two-point fit of v = K / d + C.
inline InverseFit fit_inverse(double d1, double v1, double d2, double v2) {
  if (!(d1 > 0 && d2 > 0)) throw FitError("fit_inverse: distances must be positive");
  if (d1 == d2) throw FitError("fit_inverse: probe distances coincide");
  // The response decreases with distance; anything else is not this sensor.
  if ((d1 < d2 && !(v1 > v2)) || (d1 > d2 && !(v1 < v2))) {
    throw FitError("fit_inverse: voltages are not monotone in distance");
  }
  const double k = d1 * (v1 - v2) / (1.0 - d1 / d2);
  return {k, v2 - k / d2};
}

struct LinearisedDistance {
  double distance = 0.0;  // cm, clamped to the fit range
  double raw = 0.0;       // cm, before clamping
  bool in_band = false;
};

inline LinearisedDistance volts_to_distance(double scale, double offset, double v,
                                            Interval fit_range = {10.0, 40.0}) {
  if (!(v > offset)) throw SensorRangeError("volts_to_distance: reading at or below asymptote");
  const double d = scale / (v - offset);
  return {std::clamp(d, fit_range.lo, fit_range.hi), d, fit_range.contains(d)};
}

}  // namespace diffcal::sensors
