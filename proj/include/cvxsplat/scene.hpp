// Copyright 2026 The cvxsplat Authors
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

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxsplat/math.hpp"

namespace cvxsplat {

inline constexpr int kMaxShDegree = 3;
inline constexpr int kMaxShCoeffs = 16;

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// One smooth convex primitive.
///
/// All stored scalars are unconstrained; the effective smoothness, sharpness,
/// opacity and mask come out of `effective_params`.
template <typename T> struct SmoothConvex {
  std::vector<Vec3<T>> points;
  T raw_delta{0};
  T raw_sigma{0};
  T raw_opacity{0};
  T raw_mask{0};
  std::array<Vec3<T>, kMaxShCoeffs> sh{};

  SmoothConvex() { sh.fill(Vec3<T>::Zero()); }

  std::size_t k() const { return points.size(); }
};

struct EffectiveParams {
  double delta;
  double sigma;
  double opacity;
  double mask;
};

template <typename T> EffectiveParams effective_params(const SmoothConvex<T>& c) {
  return {std::exp(double(c.raw_delta)), std::exp(double(c.raw_sigma)),
          sigmoid(double(c.raw_opacity)), sigmoid(double(c.raw_mask))};
}

template <typename T> Vec3d convex_center(const SmoothConvex<T>& c) {
  if (c.points.empty()) throw std::invalid_argument("convex_center: primitive has no points");
  Vec3d sum = Vec3d::Zero();
  for (const auto& p : c.points) sum += p.template cast<double>();
  return sum / double(c.points.size());
}

/// Max pairwise distance between the defining points.
template <typename T> double convex_diameter(const SmoothConvex<T>& c) {
  double best = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (std::size_t j = i + 1; j < c.points.size(); ++j)
      best = std::max(best, (c.points[i] - c.points[j]).template cast<double>().norm());
  return best;
}

/// Optimizable parameter count per primitive: positions, δ, σ, opacity and
/// colour. The mask gate is not counted.
constexpr int param_count(int k, int sh_degree) { return 3 * k + 3 + 3 * sh_coeff_count(sh_degree); }

enum class Projection { Pinhole, Orthographic };

/// Pinhole (or orthographic) camera with world-to-camera extrinsics
/// x_cam = R * x_world + t, OpenCV axes (x right, y down, z forward).
struct Camera {
  double fx{1}, fy{1}, cx{0}, cy{0};
  Mat3d R = Mat3d::Identity();
  Vec3d t = Vec3d::Zero();
  int width{1}, height{1};
  double z_near{0.01};
  Projection projection{Projection::Pinhole};

  Vec3d position() const { return -R.transpose() * t; }

  /// Viewing axis in world coordinates.
  Vec3d forward() const { return R.row(2).transpose(); }

  void validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("camera: width and height must be >= 1");
    if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("camera: fx and fy must be positive");
    if (!(z_near > 0)) throw std::invalid_argument("camera: z_near must be positive");
    if ((R.transpose() * R - Mat3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
      throw std::invalid_argument("camera: R is not orthonormal");
  }
};

/// World-to-camera pose of a camera at `eye` looking at `target`.
inline Camera look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& world_up, double fx, double fy,
                      int width, int height) {
  Camera cam;
  const Vec3d f = (target - eye).normalized();
  Vec3d r = f.cross(world_up);
  if (r.norm() < 1e-12) throw std::invalid_argument("look_at: up vector parallel to view direction");
  r.normalize();
  const Vec3d d = f.cross(r);
  cam.R.row(0) = r.transpose();
  cam.R.row(1) = d.transpose();
  cam.R.row(2) = f.transpose();
  cam.t = -cam.R * eye;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.width = width;
  cam.height = height;
  return cam;
}

template <typename T> struct Scene {
  std::vector<SmoothConvex<T>> primitives;
  Vec3d background = Vec3d::Zero();
  double scene_extent{1.0};
  int sh_degree{kMaxShDegree};

  std::size_t size() const { return primitives.size(); }

  /// Number of points per primitive. Zero for an empty scene.
  std::size_t k() const { return primitives.empty() ? 0 : primitives.front().k(); }
};

template <typename To, typename From> SmoothConvex<To> convert(const SmoothConvex<From>& c) {
  SmoothConvex<To> out;
  out.points.reserve(c.points.size());
  for (const auto& p : c.points) out.points.push_back(p.template cast<To>());
  out.raw_delta = To(c.raw_delta);
  out.raw_sigma = To(c.raw_sigma);
  out.raw_opacity = To(c.raw_opacity);
  out.raw_mask = To(c.raw_mask);
  for (int i = 0; i < kMaxShCoeffs; ++i) out.sh[i] = c.sh[i].template cast<To>();
  return out;
}

template <typename To, typename From> Scene<To> convert(const Scene<From>& s) {
  Scene<To> out;
  out.background = s.background;
  out.scene_extent = s.scene_extent;
  out.sh_degree = s.sh_degree;
  out.primitives.reserve(s.size());
  for (const auto& c : s.primitives) out.primitives.push_back(convert<To>(c));
  return out;
}

/// Radius of the sphere centred at the mean camera position that encloses all
/// camera centres. Falls back to 1 for a single camera.
inline double scene_extent_from_cameras(const std::vector<Camera>& cams) {
  if (cams.empty()) return 1.0;
  Vec3d mean = Vec3d::Zero();
  for (const auto& c : cams) mean += c.position();
  mean /= double(cams.size());
  double radius = 0.0;
  for (const auto& c : cams) radius = std::max(radius, (c.position() - mean).norm());
  return radius > 1e-6 ? radius : 1.0;
}

}  // namespace cvxsplat
