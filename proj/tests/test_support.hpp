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

// Shared fixtures and independent oracles for the test suites.

#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "diffcal/diffcal.hpp"

namespace diffcal::testing {

/// Default robot with a drift-free, noise-free gyro and a noise-free
/// rangefinder.
inline RobotSpec quiet_spec() {
  RobotSpec spec;
  spec.gyro = sensors::ideal_gyro();
  spec.rangefinder.noise_sigma = 0.0;
  return spec;
}

/// Robot standing in the calibration room, facing a wall.
inline std::unique_ptr<Robot> calibration_robot(const RobotSpec& spec) {
  return harness::power_on(spec);
}

/// Full calibration of a fresh robot built from `spec`; the robot is returned
/// through `out` when requested.
inline calib::CalibrationReport calibrate_spec(const RobotSpec& spec,
                                               std::unique_ptr<Robot>* out = nullptr) {
  auto robot = calibration_robot(spec);
  calib::CalibrationReport rep = calib::run_full_calibration(*robot);
  if (out != nullptr) *out = std::move(robot);
  return rep;
}

/// Forward-Euler pose integration with `substeps` sub-steps.
inline plant::PlantState euler_oracle(plant::PlantState s, double v, double omega, double dt,
                                      int substeps = 10000) {
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    s.x += v * h * std::cos(s.yaw);
    s.y -= v * h * std::sin(s.yaw);
    s.yaw += omega * h;
  }
  s.time += dt;
  return s;
}

/// Frequency of the largest DFT magnitude of a uniformly sampled, mean-removed
/// signal, searched on a fine grid between f_lo and f_hi.
inline double dominant_frequency(const std::vector<double>& x, double dt, double f_lo,
                                 double f_hi, int grid = 4000) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double best_f = f_lo;
  double best_mag = -1.0;
  for (int k = 0; k <= grid; ++k) {
    const double f = f_lo + (f_hi - f_lo) * k / grid;
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += (x[n] - mean) * std::polar(1.0, -kTwoPi * f * dt * static_cast<double>(n));
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace diffcal::testing
