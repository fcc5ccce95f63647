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

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace diffcal {

// Errors. Every failure the library reports derives from diffcal::Error so
// callers can catch one type; the subclasses carry the category.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or impossible geometry (pose outside arena, collinear points).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Curve or line fit with degenerate inputs.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Sensor reading that cannot be linearised (at or below the asymptote).
class SensorRangeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Trajectory metric evaluated on an unsuitable log.
class MetricError : public Error {
 public:
  using Error::Error;
};

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// 2-D point / vector in arena coordinates (cm).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
};

// Yaw is positive clockwise (seen from above) in a y-up arena frame, so the
// unit heading for yaw a is (cos a, -sin a).

inline Vec2 heading_vector(double yaw) { return {std::cos(yaw), -std::sin(yaw)}; }

/// Yaw of a direction vector, in (-pi, pi].
inline double yaw_of(Vec2 dir) { return std::atan2(-dir.y, dir.x); }

/// Rotates a vector clockwise by `angle`: heading_vector(a) -> heading_vector(a + angle).
inline Vec2 rotate_cw(Vec2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {p.x * c + p.y * s, -p.x * s + p.y * c};
}

/// SplitMix64 finaliser; used to derive independent per-trial and per-robot
/// seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
  return splitmix64(splitmix64(splitmix64(master ^ splitmix64(a)) ^ b) ^ c);
}

}  // namespace diffcal
