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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cvxsplat/scene.hpp"
#include "cvxsplat/sh.hpp"

namespace cvxsplat {

inline constexpr double kInitDelta = 0.1;
inline constexpr double kInitSigma = 0.00095;
inline constexpr double kInitOpacity = 0.1;
inline constexpr double kInitRawMask = 4.0;
inline constexpr double kInitRadiusFactor = 1.2;
inline constexpr int kInitNeighbours = 3;

/// K points on a sphere: uniform steps in z, golden-angle steps in longitude.
inline std::vector<Vec3d> fibonacci_sphere(int k, const Vec3d& center, double radius) {
  if (k < 4) throw std::invalid_argument("fibonacci_sphere: need at least 4 points");
  if (!(radius > 0)) throw std::invalid_argument("fibonacci_sphere: radius must be positive");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3d> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / k;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double theta = golden * i;
    out.push_back(center + radius * Vec3d(r * std::cos(theta), r * std::sin(theta), z));
  }
  return out;
}

struct ColoredPoint {
  Vec3d position;
  Vec3d color;  // linear RGB in [0, 1]
};

/// Mean distance from each point to its (up to) three nearest neighbours.
inline std::vector<double> mean_neighbour_distance(const std::vector<ColoredPoint>& pts, int neighbours = kInitNeighbours) {
  const std::size_t n = pts.size();
  std::vector<double> out(n, 0.0);
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back((pts[i].position - pts[j].position).norm());
    const std::size_t m = std::min<std::size_t>(neighbours, d.size());
    std::partial_sort(d.begin(), d.begin() + m, d.end());
    double s = 0;
    for (std::size_t q = 0; q < m; ++q) s += d[q];
    out[i] = m ? s / double(m) : 0.0;
  }
  return out;
}

/// One primitive per input point, sized from its nearest neighbours.
template <typename T = double>
Scene<T> init_scene(const std::vector<ColoredPoint>& pts, int k, int sh_degree = kMaxShDegree) {
  if (pts.size() < 4) throw std::invalid_argument("init_scene: need at least 4 points");
  if (sh_degree < 0 || sh_degree > kMaxShDegree) throw std::invalid_argument("init_scene: bad SH degree");
  const auto dist = mean_neighbour_distance(pts);
  Scene<T> scene;
  scene.sh_degree = sh_degree;
  scene.primitives.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double radius = kInitRadiusFactor * dist[i];
    if (!(radius > 0)) radius = 1e-3;  // coincident points
    SmoothConvex<T> c;
    for (const auto& p : fibonacci_sphere(k, pts[i].position, radius)) c.points.push_back(p.template cast<T>());
    c.raw_delta = T(std::log(kInitDelta));
    c.raw_sigma = T(std::log(kInitSigma));
    c.raw_opacity = T(logit(kInitOpacity));
    c.raw_mask = T(kInitRawMask);
    c.sh[0] = rgb_to_sh_dc(pts[i].color).template cast<T>();
    scene.primitives.push_back(std::move(c));
  }
  return scene;
}

}  // namespace cvxsplat
