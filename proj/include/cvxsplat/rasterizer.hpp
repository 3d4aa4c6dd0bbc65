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
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cvxsplat/field.hpp"
#include "cvxsplat/hull.hpp"
#include "cvxsplat/image.hpp"
#include "cvxsplat/scene.hpp"
#include "cvxsplat/sh.hpp"

namespace cvxsplat {

enum class MaskGate {
  Hard,  // opacity × [m > threshold]
  Soft,  // opacity × m
};

struct RenderOptions {
  ScalingMode mode = ScalingMode::Depth;
  double alpha_cutoff = 1.0 / 255.0;
  double transmittance_floor = 1e-4;
  MaskGate mask_gate = MaskGate::Hard;
  double mask_threshold = 0.01;
  int tile_size = 16;
  std::optional<Vec3d> background;  // overrides Scene::background

  /// No cutoff, no early termination: every primitive covers the whole image.
  static RenderOptions exact(ScalingMode mode) {
    RenderOptions o;
    o.mode = mode;
    o.alpha_cutoff = 0.0;
    o.transmittance_floor = 0.0;
    return o;
  }
};

/// Everything the pixel loops and the backward pass need about one visible
/// primitive in one view.
struct PreparedPrimitive {
  int index{-1};
  ProjectedConvex proj;
  std::vector<Vec2d> pixels;  // projections of all K points
  Vec3d center = Vec3d::Zero();
  double delta{0}, sigma{0}, opacity{0}, mask{0};
  double gate{1};
  double scale{1};
  double delta_scaled{0}, sigma_scaled{0};
  double alpha_scale{0};  // gate · opacity
  Vec3d view_dir = Vec3d::UnitZ();
  double view_distance{1};
  ShColor color;
};

template <typename T>
std::optional<PreparedPrimitive> prepare_primitive(const SmoothConvex<T>& c, int index, const Camera& cam,
                                                   const RenderOptions& opts, int sh_degree) {
  auto projected = project_points(c, cam);
  if (!projected) return std::nullopt;
  auto hull = graham_scan_indices(projected->pixels);
  if (!hull) return std::nullopt;

  PreparedPrimitive p;
  p.index = index;
  p.pixels = std::move(projected->pixels);
  p.proj.hull_indices = std::move(*hull);
  p.proj.hull_vertices.reserve(p.proj.hull_indices.size());
  for (int i : p.proj.hull_indices) p.proj.hull_vertices.push_back(p.pixels[i]);
  p.proj.lines = hull_lines(p.proj.hull_vertices);
  p.proj.depth = projected->depth;

  const auto eff = effective_params(c);
  p.delta = eff.delta;
  p.sigma = eff.sigma;
  p.opacity = eff.opacity;
  p.mask = eff.mask;
  p.gate = opts.mask_gate == MaskGate::Soft ? eff.mask : (eff.mask > opts.mask_threshold ? 1.0 : 0.0);
  p.scale = scaling_factor(opts.mode, p.proj.depth);
  p.delta_scaled = p.scale * p.delta;
  p.sigma_scaled = p.scale * p.sigma;
  p.alpha_scale = p.gate * p.opacity;

  p.center = convex_center(c);
  if (cam.projection == Projection::Pinhole) {
    const Vec3d v = p.center - cam.position();
    p.view_distance = v.norm();
    p.view_dir = v / p.view_distance;
  } else {
    p.view_dir = cam.forward();
    p.view_distance = 1.0;
  }
  p.color = eval_sh_color_full(c, p.view_dir, sh_degree);

  p.proj.bbox = bbox_with_margin(p.proj, p.delta_scaled, p.sigma_scaled, p.alpha_scale, opts.alpha_cutoff, cam);
  return p;
}

/// Projects every primitive and returns the visible ones ordered by increasing
/// centre depth (ties keep scene order).
template <typename T>
std::vector<PreparedPrimitive> prepare_view(const Scene<T>& scene, const Camera& cam, const RenderOptions& opts) {
  cam.validate();
  const int n = int(scene.size());
  std::vector<std::optional<PreparedPrimitive>> slots(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) slots[i] = prepare_primitive(scene.primitives[i], i, cam, opts, scene.sh_degree);
  std::vector<PreparedPrimitive> out;
  out.reserve(n);
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  std::stable_sort(out.begin(), out.end(), [](const PreparedPrimitive& a, const PreparedPrimitive& b) {
    return a.proj.depth < b.proj.depth;
  });
  return out;
}

template <typename T>
std::vector<std::pair<int, ProjectedConvex>> sort_by_depth(const Scene<T>& scene, const Camera& cam,
                                                           const RenderOptions& opts = {}) {
  std::vector<std::pair<int, ProjectedConvex>> out;
  for (auto& p : prepare_view(scene, cam, opts)) out.emplace_back(p.index, std::move(p.proj));
  return out;
}

template <typename T> struct RenderOutput {
  Image<T> image;
  Image<T> final_transmittance;
  Image<T> weight_sum;  // Σ_n T_n·a_n per pixel
  Image<int> per_pixel_count;
};

namespace detail {

/// Compact copy of a prepared primitive in the rasterizer's scalar type.
template <typename T> struct KernelPrimitive {
  int line_begin{0};
  int line_count{0};
  T delta_scaled{0}, sigma_scaled{0}, alpha_scale{0};
  T color[3]{};
  PixelRect bbox;
};

template <typename T> struct KernelScene {
  std::vector<KernelPrimitive<T>> prims;
  std::vector<T> nx, ny, off;  // flattened line parameters
  int max_lines{0};
};

template <typename T> KernelScene<T> make_kernel_scene(std::span<const PreparedPrimitive> prepared) {
  KernelScene<T> ks;
  ks.prims.reserve(prepared.size());
  for (const auto& p : prepared) {
    KernelPrimitive<T> k;
    k.line_begin = int(ks.nx.size());
    k.line_count = int(p.proj.lines.size());
    for (const auto& l : p.proj.lines) {
      ks.nx.push_back(T(l.normal.x()));
      ks.ny.push_back(T(l.normal.y()));
      ks.off.push_back(T(l.offset));
    }
    k.delta_scaled = T(p.delta_scaled);
    k.sigma_scaled = T(p.sigma_scaled);
    k.alpha_scale = T(p.alpha_scale);
    for (int c = 0; c < 3; ++c) k.color[c] = T(p.color.color[c]);
    k.bbox = p.proj.bbox;
    ks.max_lines = std::max(ks.max_lines, k.line_count);
    ks.prims.push_back(k);
  }
  return ks;
}

/// Signed distances, smooth SDF and indicator at one pixel. `dist` receives
/// the line distances.
template <typename T>
inline T eval_indicator(const KernelScene<T>& ks, const KernelPrimitive<T>& k, T qx, T qy, T* dist, T& phi) {
  T m = -std::numeric_limits<T>::infinity();
  for (int j = 0; j < k.line_count; ++j) {
    const int li = k.line_begin + j;
    dist[j] = ks.nx[li] * qx + ks.ny[li] * qy + ks.off[li];
    m = std::max(m, k.delta_scaled * dist[j]);
  }
  T sum = 0;
  for (int j = 0; j < k.line_count; ++j) sum += std::exp(k.delta_scaled * dist[j] - m);
  phi = m + std::log(sum);
  return T(1) / (T(1) + std::exp(k.sigma_scaled * phi));
}

struct TileGrid {
  int tile_size, tiles_x, tiles_y;
  int count() const { return tiles_x * tiles_y; }
};

inline TileGrid make_grid(const Camera& cam, int tile_size) {
  if (tile_size < 1) throw std::invalid_argument("tile size must be >= 1");
  return {tile_size, (cam.width + tile_size - 1) / tile_size, (cam.height + tile_size - 1) / tile_size};
}

/// Per-tile lists of primitive slots in depth order.
template <typename T> std::vector<std::vector<int>> bin_tiles(const KernelScene<T>& ks, const TileGrid& g) {
  std::vector<std::vector<int>> bins(g.count());
  for (int s = 0; s < int(ks.prims.size()); ++s) {
    const auto& b = ks.prims[s].bbox;
    if (b.empty()) continue;
    const int tx0 = b.x0 / g.tile_size, tx1 = (b.x1 - 1) / g.tile_size;
    const int ty0 = b.y0 / g.tile_size, ty1 = (b.y1 - 1) / g.tile_size;
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx) bins[ty * g.tiles_x + tx].push_back(s);
  }
  return bins;
}

}  // namespace detail

template <typename T>
RenderOutput<T> render_prepared(std::span<const PreparedPrimitive> prepared, const Camera& cam,
                                const RenderOptions& opts, const Vec3d& background) {
  const int W = cam.width, H = cam.height;
  RenderOutput<T> out{Image<T>(W, H, 3), Image<T>(W, H, 1), Image<T>(W, H, 1), Image<int>(W, H, 1)};
  const auto ks = detail::make_kernel_scene<T>(prepared);
  const auto grid = detail::make_grid(cam, opts.tile_size);
  const auto bins = detail::bin_tiles(ks, grid);
  const T cutoff = T(opts.alpha_cutoff);
  const T floor_t = T(opts.transmittance_floor);
  const T bg[3] = {T(background.x()), T(background.y()), T(background.z())};

#pragma omp parallel for schedule(dynamic, 1)
  for (int tile = 0; tile < grid.count(); ++tile) {
    std::vector<T> dist(std::max(ks.max_lines, 1));
    const int tx = tile % grid.tiles_x, ty = tile / grid.tiles_x;
    const int x0 = tx * grid.tile_size, y0 = ty * grid.tile_size;
    const int x1 = std::min(W, x0 + grid.tile_size), y1 = std::min(H, y0 + grid.tile_size);
    const auto& list = bins[tile];
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        const T qx = T(x) + T(0.5), qy = T(y) + T(0.5);
        T trans = 1, wsum = 0;
        T c[3] = {0, 0, 0};
        int count = 0;
        for (int slot : list) {
          const auto& k = ks.prims[slot];
          if (!k.bbox.contains(x, y)) continue;
          T phi;
          const T alpha = k.alpha_scale * detail::eval_indicator(ks, k, qx, qy, dist.data(), phi);
          if (alpha < cutoff || alpha <= T(0)) continue;
          const T w = trans * alpha;
          for (int ch = 0; ch < 3; ++ch) c[ch] += w * k.color[ch];
          wsum += w;
          trans -= w;
          ++count;
          if (trans < floor_t) break;
        }
        for (int ch = 0; ch < 3; ++ch) out.image(x, y, ch) = std::clamp(c[ch] + trans * bg[ch], T(0), T(1));
        out.final_transmittance(x, y) = trans;
        out.weight_sum(x, y) = wsum;
        out.per_pixel_count(x, y) = count;
      }
  }
  return out;
}

/// Tile-based forward render.
template <typename T>
RenderOutput<T> render(const Scene<T>& scene, const Camera& cam, const RenderOptions& opts = {}) {
  const auto prepared = prepare_view(scene, cam, opts);
  return render_prepared<T>(prepared, cam, opts, opts.background.value_or(scene.background));
}

/// Brute-force oracle: every sorted primitive is evaluated at every pixel in
/// double precision, with no cutoff, no bbox and no early termination.
template <typename T>
RenderOutput<double> render_reference(const Scene<T>& scene, const Camera& cam, RenderOptions opts = {}) {
  opts.alpha_cutoff = 0.0;
  opts.transmittance_floor = 0.0;
  const auto prepared = prepare_view(scene, cam, opts);
  const Vec3d bg = opts.background.value_or(scene.background);
  const int W = cam.width, H = cam.height;
  RenderOutput<double> out{ImageD(W, H, 3), ImageD(W, H, 1), ImageD(W, H, 1), Image<int>(W, H, 1)};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const Vec2d q = pixel_center(x, y);
      double trans = 1, wsum = 0;
      Vec3d c = Vec3d::Zero();
      int count = 0;
      for (const auto& p : prepared) {
        const double alpha = p.alpha_scale * indicator(smooth_sdf(p.proj.lines, q, p.delta_scaled), p.sigma_scaled);
        const double w = trans * alpha;
        c += w * p.color.color;
        wsum += w;
        trans *= 1.0 - alpha;
        if (alpha > 0) ++count;
      }
      c += trans * bg;
      for (int ch = 0; ch < 3; ++ch) out.image(x, y, ch) = std::clamp(c[ch], 0.0, 1.0);
      out.final_transmittance(x, y) = trans;
      out.weight_sum(x, y) = wsum;
      out.per_pixel_count(x, y) = count;
    }
  return out;
}

}  // namespace cvxsplat
