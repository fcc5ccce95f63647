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

// Plane-to-plane perspective correction from the four corners of a square of
// known size, plus a pinhole camera used to synthesise image points.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

#include "diffcal/core.hpp"

namespace diffcal::harness {

struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();  // m(2, 2) == 1
};

/// Projective map of a point; throws when the point maps to infinity.
inline Vec2 apply_homography(const Homography& h, Vec2 p) {
  const Eigen::Vector3d q = h.m * Eigen::Vector3d(p.x, p.y, 1.0);
  const double scale = std::max({1.0, std::abs(q.x()), std::abs(q.y())});
  if (std::abs(q.z()) <= 1e-12 * scale) {
    throw GeometryError("apply_homography: point maps to infinity");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

inline Homography inverse(const Homography& h) {
  Eigen::FullPivLU<Eigen::Matrix3d> lu(h.m);
  if (!lu.isInvertible()) throw GeometryError("homography is singular");
  Homography out{lu.inverse()};
  out.m /= out.m(2, 2);
  return out;
}

namespace detail {

inline bool collinear(Vec2 a, Vec2 b, Vec2 c) {
  const double area = std::abs((b - a).cross(c - a));
  const double span = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm(), 1e-300});
  return area <= 1e-9 * span * span;
}

}  // namespace detail

/// Direct linear transform for four correspondences (h22 fixed to 1).
inline Homography homography_from_points(const std::array<Vec2, 4>& src,
                                         const std::array<Vec2, 4>& dst) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        if (detail::collinear(src[i], src[j], src[k]) ||
            detail::collinear(dst[i], dst[j], dst[k])) {
          throw GeometryError("homography: three of the four points are collinear");
        }
      }
    }
  }
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw GeometryError("homography: degenerate configuration");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Homography out;
  out.m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return out;
}

/// Maps the image corners of a square (in order around its boundary, starting
/// at the corner that becomes the origin) to (0,0), (s,0), (s,s), (0,s).
inline Homography homography_from_square(const std::array<Vec2, 4>& image_pts,
                                         double square_side) {
  if (!(square_side > 0)) throw DomainError("homography_from_square: side must be > 0");
  const std::array<Vec2, 4> world{
      Vec2{0, 0}, Vec2{square_side, 0}, Vec2{square_side, square_side}, Vec2{0, square_side}};
  return homography_from_points(image_pts, world);
}

/// Pinhole camera looking at the floor plane z = 0 from above, tilted.
struct SyntheticCamera {
  double focal = 800.0;              // px
  Vec2 principal{320.0, 240.0};      // px
  Eigen::Vector3d position{0.0, -120.0, 250.0};  // cm
  double tilt = 0.45;                // rad about the camera x axis
  double roll = 0.05;                // rad

  /// Floor point (cm) to image point (px).
  Vec2 project(Vec2 floor) const {
    const Eigen::Matrix3d r =
        (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()) *
         Eigen::AngleAxisd(kPi + tilt, Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    const Eigen::Vector3d pc = r.transpose() * (Eigen::Vector3d(floor.x, floor.y, 0.0) - position);
    if (!(pc.z() > 0)) throw GeometryError("SyntheticCamera: point behind the camera");
    return {principal.x + focal * pc.x() / pc.z(), principal.y + focal * pc.y() / pc.z()};
  }
};

}  // namespace diffcal::harness
