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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cvxsplat/hull.hpp"

namespace cvxsplat {

/// Multiplier applied to δ and σ as a function of the convex centre depth.
enum class ScalingMode { None, SqrtDepth, Depth, DepthSquared };

inline double scaling_factor(ScalingMode mode, double depth) {
  switch (mode) {
    case ScalingMode::None: return 1.0;
    case ScalingMode::SqrtDepth: return std::sqrt(depth);
    case ScalingMode::Depth: return depth;
    case ScalingMode::DepthSquared: return depth * depth;
  }
  return 1.0;
}

inline double scaling_factor_derivative(ScalingMode mode, double depth) {
  switch (mode) {
    case ScalingMode::None: return 0.0;
    case ScalingMode::SqrtDepth: return 0.5 / std::sqrt(depth);
    case ScalingMode::Depth: return 1.0;
    case ScalingMode::DepthSquared: return 2.0 * depth;
  }
  return 0.0;
}

inline ScalingMode parse_scaling_mode(std::string_view s) {
  if (s == "none") return ScalingMode::None;
  if (s == "sqrt") return ScalingMode::SqrtDepth;
  if (s == "depth") return ScalingMode::Depth;
  if (s == "depth2") return ScalingMode::DepthSquared;
  throw std::invalid_argument("unknown scaling mode '" + std::string(s) + "' (expected none|sqrt|depth|depth2)");
}

inline const char* to_string(ScalingMode m) {
  switch (m) {
    case ScalingMode::None: return "none";
    case ScalingMode::SqrtDepth: return "sqrt";
    case ScalingMode::Depth: return "depth";
    case ScalingMode::DepthSquared: return "depth2";
  }
  return "?";
}

inline double signed_distance_3d(const Vec3d& normal, double offset, const Vec3d& p) {
  return normal.dot(p) + offset;
}

/// log Σ exp(δs·L_j) with max subtraction. `distances` must be non-empty.
template <typename T> T smooth_sdf_from_distances(std::span<const T> distances, T delta_scaled) {
  T m = -std::numeric_limits<T>::infinity();
  for (T l : distances) m = std::max(m, delta_scaled * l);
  T sum = 0;
  for (T l : distances) sum += std::exp(delta_scaled * l - m);
  return m + std::log(sum);
}

/// Softmax weights ∂φ/∂(δs·L_j) for the same inputs.
template <typename T>
void smooth_sdf_weights(std::span<const T> distances, T delta_scaled, std::span<T> weights) {
  T m = -std::numeric_limits<T>::infinity();
  for (T l : distances) m = std::max(m, delta_scaled * l);
  T sum = 0;
  for (std::size_t j = 0; j < distances.size(); ++j) {
    weights[j] = std::exp(delta_scaled * distances[j] - m);
    sum += weights[j];
  }
  for (std::size_t j = 0; j < distances.size(); ++j) weights[j] /= sum;
}

inline double smooth_sdf(std::span<const Line2D> lines, const Vec2d& q, double delta_scaled) {
  if (lines.empty()) throw std::invalid_argument("smooth_sdf: no lines");
  std::vector<double> l(lines.size());
  for (std::size_t j = 0; j < lines.size(); ++j) l[j] = lines[j].signed_distance(q);
  return smooth_sdf_from_distances<double>(l, delta_scaled);
}

/// Plane form used for 3D convexes: planes given as (normal, offset).
inline double smooth_sdf_3d(std::span<const std::pair<Vec3d, double>> planes, const Vec3d& p,
                            double delta_scaled) {
  if (planes.empty()) throw std::invalid_argument("smooth_sdf_3d: no planes");
  std::vector<double> l(planes.size());
  for (std::size_t j = 0; j < planes.size(); ++j) l[j] = signed_distance_3d(planes[j].first, planes[j].second, p);
  return smooth_sdf_from_distances<double>(l, delta_scaled);
}

template <typename T> inline T indicator(T phi, T sigma_scaled) { return sigmoid(-sigma_scaled * phi); }

inline double evaluate_contribution(const ProjectedConvex& pc, const Vec2d& q, double delta, double sigma,
                                    ScalingMode mode) {
  const double s = scaling_factor(mode, pc.depth);
  return indicator(smooth_sdf(pc.lines, q, s * delta), s * sigma);
}

}  // namespace cvxsplat
