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
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvxsplat/scene.hpp"

namespace cvxsplat {

/// Oriented line with outward unit normal: L(q) = normal·q + offset.
struct Line2D {
  Vec2d normal = Vec2d::Zero();
  double offset{0};

  double signed_distance(const Vec2d& q) const { return normal.dot(q) + offset; }
};

/// Half-open integer pixel rectangle [x0, x1) × [y0, y1).
struct PixelRect {
  int x0{0}, y0{0}, x1{0}, y1{0};

  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Per-view projection of one primitive.
struct ProjectedConvex {
  std::vector<Vec2d> hull_vertices;  // counter-clockwise
  std::vector<int> hull_indices;     // index of each hull vertex in the primitive's point list
  std::vector<Line2D> lines;         // lines[j] joins hull_vertices[j] and hull_vertices[j+1]
  double depth{0};                   // camera-frame z of the convex centre
  PixelRect bbox;
};

inline constexpr double kCollinearTolerance = 1e-9;

struct ProjectedPoints {
  std::vector<Vec2d> pixels;
  std::vector<double> point_depths;
  double depth{0};  // camera-frame z of the centre
};

/// Projects every point of `c`. Returns nullopt (culled) when any point lies at
/// or in front of the near plane.
template <typename T>
std::optional<ProjectedPoints> project_points(const SmoothConvex<T>& c, const Camera& cam) {
  ProjectedPoints out;
  out.pixels.reserve(c.k());
  out.point_depths.reserve(c.k());
  for (const auto& p : c.points) {
    const Vec3d xc = cam.R * p.template cast<double>() + cam.t;
    if (xc.z() <= cam.z_near) return std::nullopt;
    if (cam.projection == Projection::Pinhole)
      out.pixels.emplace_back(cam.fx * xc.x() / xc.z() + cam.cx, cam.fy * xc.y() / xc.z() + cam.cy);
    else
      out.pixels.emplace_back(cam.fx * xc.x() + cam.cx, cam.fy * xc.y() + cam.cy);
    out.point_depths.push_back(xc.z());
  }
  out.depth = (cam.R * convex_center(c) + cam.t).z();
  return out;
}

/// Graham scan. Returns indices into `points` of the strictly convex hull in
/// counter-clockwise order, or nullopt when fewer than three non-collinear
/// points exist.
inline std::optional<std::vector<int>> graham_scan_indices(std::span<const Vec2d> points) {
  const int n = int(points.size());
  if (n < 3) return std::nullopt;

  int pivot = 0;
  for (int i = 1; i < n; ++i) {
    const auto& p = points[i];
    const auto& b = points[pivot];
    if (p.y() < b.y() || (p.y() == b.y() && p.x() < b.x())) pivot = i;
  }
  const Vec2d origin = points[pivot];

  struct Entry {
    int index;
    double angle;
    double dist2;
  };
  std::vector<Entry> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec2d d = points[i] - origin;
    const double dist2 = d.squaredNorm();
    if (i == pivot || dist2 == 0.0) continue;
    order.push_back({i, std::atan2(d.y(), d.x()), dist2});
  }
  std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
    return a.index < b.index;
  });
  // Points collinear with the pivot may land in the wrong order when their
  // angles differ by rounding; order each such run by distance.
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() &&
           std::abs(cross2(origin, points[order[j - 1].index], points[order[j].index])) <= kCollinearTolerance)
      ++j;
    std::sort(order.begin() + i, order.begin() + j, [](const Entry& a, const Entry& b) {
      if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
      return a.index < b.index;
    });
    i = j;
  }

  std::vector<int> hull;
  hull.reserve(n);
  hull.push_back(pivot);
  for (const auto& e : order) {
    const Vec2d& p = points[e.index];
    while (hull.size() >= 2 &&
           cross2(points[hull[hull.size() - 2]], points[hull.back()], p) <= kCollinearTolerance)
      hull.pop_back();
    hull.push_back(e.index);
  }
  // The last vertex may be collinear with its predecessor and the pivot.
  while (hull.size() >= 3 &&
         cross2(points[hull[hull.size() - 2]], points[hull.back()], points[hull.front()]) <= kCollinearTolerance)
    hull.pop_back();
  if (hull.size() < 3) return std::nullopt;
  return hull;
}

inline std::optional<std::vector<Vec2d>> graham_scan(std::span<const Vec2d> points) {
  auto idx = graham_scan_indices(points);
  if (!idx) return std::nullopt;
  std::vector<Vec2d> out;
  out.reserve(idx->size());
  for (int i : *idx) out.push_back(points[i]);
  return out;
}

inline std::vector<Line2D> hull_lines(std::span<const Vec2d> hull) {
  if (hull.size() < 3) throw std::invalid_argument("hull_lines: need at least 3 vertices");
  std::vector<Line2D> lines;
  lines.reserve(hull.size());
  for (std::size_t j = 0; j < hull.size(); ++j) {
    const Vec2d& a = hull[j];
    const Vec2d& b = hull[(j + 1) % hull.size()];
    const Vec2d e = b - a;
    const double len = e.norm();
    if (len == 0.0) throw std::invalid_argument("hull_lines: repeated vertex");
    Line2D l;
    l.normal = Vec2d(e.y(), -e.x()) / len;
    l.offset = -l.normal.dot(a);
    lines.push_back(l);
  }
  return lines;
}

/// Screen rectangle outside which alpha = opacity·I stays below `cutoff`.
///
/// Outside the hull φ ≥ δs·L_max, so I < ε whenever L_max exceeds
/// margin = ln((1-ε)/ε) / (σs·δs) with ε = cutoff / opacity. The region
/// {L_max ≤ margin} is the hull with every edge pushed out by `margin`; its
/// vertices are the miter offsets of the hull vertices.
inline PixelRect bbox_with_margin(const ProjectedConvex& pc, double delta_scaled, double sigma_scaled,
                                  double opacity, double cutoff, const Camera& cam) {
  PixelRect full{0, 0, cam.width, cam.height};
  if (pc.hull_vertices.size() < 3) return {};
  if (cutoff > 0 && opacity <= cutoff) return {};

  double margin = std::numeric_limits<double>::infinity();
  if (cutoff > 0) {
    const double eps = std::min(cutoff / opacity, 0.5);
    margin = std::log((1.0 - eps) / eps) / (sigma_scaled * delta_scaled);
  }
  if (!std::isfinite(margin)) return full;

  const std::size_t n = pc.hull_vertices.size();
  double minx = std::numeric_limits<double>::infinity(), miny = minx;
  double maxx = -minx, maxy = -minx;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2d& n_prev = pc.lines[(j + n - 1) % n].normal;
    const Vec2d& n_next = pc.lines[j].normal;
    const Vec2d v = pc.hull_vertices[j] + margin * (n_prev + n_next) / (1.0 + n_prev.dot(n_next));
    minx = std::min(minx, v.x());
    maxx = std::max(maxx, v.x());
    miny = std::min(miny, v.y());
    maxy = std::max(maxy, v.y());
  }
  if (!std::isfinite(minx) || !std::isfinite(maxx) || !std::isfinite(miny) || !std::isfinite(maxy)) return full;
  // Pixel (x, y) samples the point (x + 0.5, y + 0.5).
  auto clamp_to = [](double v, int lo, int hi) {
    return int(std::clamp(v, double(lo), double(hi)));
  };
  PixelRect r;
  r.x0 = clamp_to(std::ceil(minx - 0.5), 0, cam.width);
  r.x1 = clamp_to(std::floor(maxx - 0.5) + 1, 0, cam.width);
  r.y0 = clamp_to(std::ceil(miny - 0.5), 0, cam.height);
  r.y1 = clamp_to(std::floor(maxy - 0.5) + 1, 0, cam.height);
  if (r.empty()) return {};
  return r;
}

/// Pixel-centre sampling position for integer pixel coordinates.
inline Vec2d pixel_center(int x, int y) { return {x + 0.5, y + 0.5}; }

}  // namespace cvxsplat
