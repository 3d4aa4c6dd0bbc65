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

#include <cmath>
#include <algorithm>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxsplat/config.hpp"
#include "cvxsplat/init.hpp"
#include "cvxsplat/rasterizer.hpp"
#include "cvxsplat/trainer.hpp"

namespace cvxsplat {

enum class Target2D { Rectangle, Circle, Gaussian, AnisotropicGaussian, Solid };

inline Target2D parse_target2d(const std::string& s) {
  if (s == "rectangle") return Target2D::Rectangle;
  if (s == "circle") return Target2D::Circle;
  if (s == "gaussian") return Target2D::Gaussian;
  if (s == "aniso-gaussian") return Target2D::AnisotropicGaussian;
  if (s == "solid") return Target2D::Solid;
  throw std::invalid_argument("unknown target '" + s + "' (rectangle|circle|gaussian|aniso-gaussian|solid)");
}

inline const Vec3d kFitForeground(0.9, 0.55, 0.2);
inline const Vec3d kFitBackground(0.0, 0.0, 0.0);

/// Procedural targets on a black background, sampled at pixel centres.
inline ImageD make_target2d(Target2D t, int size) {
  ImageD img(size, size, 3);
  const double c = 0.5 * size;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double px = x + 0.5 - c, py = y + 0.5 - c;
      double w = 0;
      switch (t) {
        case Target2D::Rectangle: w = (std::abs(px) < 0.3 * size && std::abs(py) < 0.2 * size) ? 1 : 0; break;
        case Target2D::Circle: w = px * px + py * py < std::pow(0.3 * size, 2) ? 1 : 0; break;
        case Target2D::Gaussian: {
          const double s = 0.15 * size;
          w = std::exp(-(px * px + py * py) / (2 * s * s));
          break;
        }
        case Target2D::AnisotropicGaussian: {
          const double a = std::numbers::pi / 6, ca = std::cos(a), sa = std::sin(a);
          const double u = ca * px + sa * py, v = -sa * px + ca * py;
          const double su = 0.22 * size, sv = 0.09 * size;
          w = std::exp(-(u * u) / (2 * su * su) - (v * v) / (2 * sv * sv));
          break;
        }
        case Target2D::Solid: w = 0; break;
      }
      for (int ch = 0; ch < 3; ++ch) img(x, y, ch) = w * kFitForeground[ch] + (1 - w) * kFitBackground[ch];
    }
  return img;
}

/// Orthographic camera whose world x/y are pixel coordinates.
inline Camera pixel_camera(int width, int height) {
  Camera cam;
  cam.projection = Projection::Orthographic;
  cam.fx = cam.fy = 1.0;
  cam.cx = cam.cy = 0.0;
  cam.width = width;
  cam.height = height;
  return cam;
}

struct Fit2dOptions {
  int primitives = 1;
  int k = 6;
  int iterations = 2000;
  std::uint64_t seed = 0;
  double init_delta = 0.5;
  double init_sigma = 0.5;
  double init_opacity = 0.7;
  std::vector<int> milestones = {0, 10, 50, 100, 500, 1000};
  // Point learning rates are in pixels.
  TrainConfig config = [] {
    TrainConfig c;
    c.scaling_mode = ScalingMode::None;
    c.lr_position_init = 0.5;
    c.lr_position_final = 0.01;
    c.scale_position_lr_by_extent = false;
    c.lr_delta = 0.01;
    c.lr_sigma = 0.01;
    c.lr_sh = 0.01;
    c.densify_start = 1 << 30;
    c.eval_interval = 100;
    return c;
  }();
};

struct Fit2dSnapshot {
  int iteration;
  ImageD image;
  Scene<double> scene;
};

struct Fit2dResult {
  Scene<double> scene;
  double l1{0};
  double psnr{0};
  std::vector<IterationLog> log;
  std::vector<Fit2dSnapshot> snapshots;
};

/// Starting primitives: regular K-gons on a grid over the image.
inline Scene<double> init_scene2d(const Fit2dOptions& o, int width, int height) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  Scene<double> s;
  s.sh_degree = 0;
  s.background = kFitBackground;
  const int cols = int(std::ceil(std::sqrt(double(o.primitives))));
  const int rows = (o.primitives + cols - 1) / cols;
  const double radius = 0.3 * std::min(width / double(cols), height / double(rows));
  for (int i = 0; i < o.primitives; ++i) {
    const double cx = (i % cols + 0.5) * width / cols, cy = (i / cols + 0.5) * height / rows;
    SmoothConvex<double> c;
    for (int j = 0; j < o.k; ++j) {
      const double a = 2 * std::numbers::pi * (j + jitter(rng)) / o.k;
      c.points.push_back(Vec3d(cx + radius * std::cos(a), cy + radius * std::sin(a), 1.0));
    }
    c.raw_delta = std::log(o.init_delta);
    c.raw_sigma = std::log(o.init_sigma);
    c.raw_opacity = logit(o.init_opacity);
    c.raw_mask = kInitRawMask;
    c.sh[0] = rgb_to_sh_dc(Vec3d::Constant(0.5));
    s.primitives.push_back(std::move(c));
  }
  return s;
}

/// Renders with the hull lines drawn in red and the defining points in black.
inline ImageD hull_overlay(const Scene<double>& scene, const Camera& cam, const RenderOptions& opts) {
  ImageD img = render(scene, cam, opts).image;
  for (const auto& p : prepare_view(scene, cam, opts)) {
    const auto& hv = p.proj.hull_vertices;
    for (std::size_t j = 0; j < hv.size(); ++j) draw_line(img, hv[j], hv[(j + 1) % hv.size()], Vec3d(1, 0, 0));
    for (const auto& q : p.pixels) draw_dot(img, q, 1, Vec3d(0, 0, 0));
  }
  return img;
}

inline Fit2dResult fit2d(const ImageD& target, const Fit2dOptions& o) {
  if (o.primitives < 1) throw std::invalid_argument("fit2d: need at least one primitive");
  if (o.iterations < 0) throw std::invalid_argument("fit2d: iterations must be >= 0");
  const Camera cam = pixel_camera(target.width(), target.height());
  TrainConfig cfg = o.config;
  cfg.total_iterations = o.iterations;
  cfg.seed = o.seed;
  const RenderOptions opts = render_options(cfg);

  Fit2dResult res;
  res.scene = init_scene2d(o, target.width(), target.height());
  auto wants = [&](int it) { return std::find(o.milestones.begin(), o.milestones.end(), it) != o.milestones.end(); };
  if (wants(0)) res.snapshots.push_back({0, render(res.scene, cam, opts).image, res.scene});

  std::vector<View> views{{cam, target, "target"}};
  TrainCallbacks cb;
  cb.on_iteration = [&](const IterationLog& e, const Scene<double>& s) {
    if (wants(e.iteration) || e.iteration == o.iterations)
      res.snapshots.push_back({e.iteration, render(s, cam, opts).image, s});
  };
  if (o.iterations > 0) res.log = train(res.scene, views, cfg, cb).log;

  const ImageD final_img = render(res.scene, cam, opts).image;
  double l1 = 0;
  for (std::size_t i = 0; i < final_img.size(); ++i) l1 += std::abs(final_img.values()[i] - target.values()[i]);
  res.l1 = l1 / double(final_img.size());
  res.psnr = psnr(final_img, target);
  return res;
}

}  // namespace cvxsplat
