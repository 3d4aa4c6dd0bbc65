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
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "cvxsplat/init.hpp"
#include "cvxsplat/rasterizer.hpp"
#include "cvxsplat/scene.hpp"
#include "cvxsplat/trainer.hpp"

namespace cvxsplat {

struct RingOptions {
  int count = 8;
  double radius = 4.0;
  double height = 1.0;
  double phase = 0.0;  // radians
  int width = 96;
  int height_px = 96;
  double focal = 1.2;  // in units of the image width
};

/// Cameras evenly spaced on a horizontal ring, all looking at the origin.
/// World y points down, matching the camera convention.
inline std::vector<Camera> ring_cameras(const RingOptions& o) {
  if (o.count < 1) throw std::invalid_argument("ring_cameras: need at least one camera");
  std::vector<Camera> cams;
  for (int i = 0; i < o.count; ++i) {
    const double a = o.phase + 2.0 * std::numbers::pi * i / o.count;
    const Vec3d eye(o.radius * std::sin(a), -o.height, -o.radius * std::cos(a));
    cams.push_back(look_at(eye, Vec3d::Zero(), Vec3d(0, -1, 0), o.focal * o.width, o.focal * o.width, o.width,
                           o.height_px));
  }
  return cams;
}

/// A primitive from a Fibonacci point set, optionally squashed along each axis.
inline SmoothConvex<double> make_convex(int k, const Vec3d& center, const Vec3d& half_extent, double delta,
                                        double sigma, double opacity, const Vec3d& rgb) {
  SmoothConvex<double> c;
  for (const auto& p : fibonacci_sphere(k, Vec3d::Zero(), 1.0)) c.points.push_back(center + p.cwiseProduct(half_extent));
  c.raw_delta = std::log(delta);
  c.raw_sigma = std::log(sigma);
  c.raw_opacity = logit(opacity);
  c.raw_mask = kInitRawMask;
  c.sh[0] = rgb_to_sh_dc(rgb);
  return c;
}

/// Five overlapping primitives of distinct colours around the origin.
inline Scene<double> preset_scene(int k = 6) {
  Scene<double> s;
  s.sh_degree = 1;
  s.background = Vec3d(0.05, 0.05, 0.08);
  s.primitives.push_back(make_convex(k, Vec3d(0.0, 0.0, 0.0), Vec3d(0.55, 0.45, 0.5), 0.5, 0.3, 0.9, Vec3d(0.85, 0.25, 0.2)));
  s.primitives.push_back(make_convex(k, Vec3d(0.7, -0.3, 0.2), Vec3d(0.3, 0.4, 0.3), 0.5, 0.3, 0.85, Vec3d(0.2, 0.7, 0.3)));
  s.primitives.push_back(make_convex(k, Vec3d(-0.6, 0.2, -0.3), Vec3d(0.35, 0.3, 0.4), 0.5, 0.3, 0.8, Vec3d(0.25, 0.35, 0.85)));
  s.primitives.push_back(make_convex(k, Vec3d(0.1, 0.6, 0.5), Vec3d(0.45, 0.2, 0.3), 0.5, 0.3, 0.9, Vec3d(0.9, 0.8, 0.3)));
  s.primitives.push_back(make_convex(k, Vec3d(-0.2, -0.7, -0.1), Vec3d(0.3, 0.25, 0.3), 0.5, 0.3, 0.75, Vec3d(0.7, 0.4, 0.8)));
  return s;
}

/// Random scene with `n` primitives inside the unit ball.
inline Scene<double> random_synth_scene(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
  Scene<double> s;
  s.sh_degree = 1;
  s.background = Vec3d(0.05, 0.05, 0.08);
  for (int i = 0; i < n; ++i) {
    const Vec3d c(uni(-0.7, 0.7), uni(-0.7, 0.7), uni(-0.7, 0.7));
    const Vec3d half(uni(0.2, 0.5), uni(0.2, 0.5), uni(0.2, 0.5));
    s.primitives.push_back(make_convex(k, c, half, 0.5, 0.3, uni(0.6, 0.95), Vec3d(uni(0.1, 0.9), uni(0.1, 0.9), uni(0.1, 0.9))));
  }
  return s;
}

struct SynthOptions {
  int primitives = 5;
  int k = 6;
  bool preset = true;
  int train_views = 8;
  int test_views = 4;
  int size = 96;
  std::uint64_t seed = 0;
  ScalingMode mode = ScalingMode::Depth;
};

struct SynthData {
  Scene<double> truth;
  std::vector<View> train;
  std::vector<View> test;
};

/// Ground-truth scene, a training ring and a held-out ring at the mid-angles.
inline SynthData make_synth(const SynthOptions& o) {
  SynthData d;
  d.truth = o.preset && o.primitives == 5 ? preset_scene(o.k) : random_synth_scene(o.primitives, o.k, o.seed);
  RingOptions ring;
  ring.count = o.train_views;
  ring.width = ring.height_px = o.size;
  const auto train_cams = ring_cameras(ring);
  d.truth.scene_extent = scene_extent_from_cameras(train_cams);
  ring.count = o.test_views;
  ring.phase = o.test_views > 0 ? std::numbers::pi / o.train_views : 0.0;
  const auto test_cams = o.test_views > 0 ? ring_cameras(ring) : std::vector<Camera>{};
  TrainConfig cfg;
  cfg.scaling_mode = o.mode;
  const auto opts = render_options(cfg);
  for (std::size_t i = 0; i < train_cams.size(); ++i)
    d.train.push_back({train_cams[i], render(d.truth, train_cams[i], opts).image, "train_" + std::to_string(i)});
  for (std::size_t i = 0; i < test_cams.size(); ++i)
    d.test.push_back({test_cams[i], render(d.truth, test_cams[i], opts).image, "test_" + std::to_string(i)});
  return d;
}

/// Offsets positions and rerandomizes colours and opacities.
inline Scene<double> perturb_scene(const Scene<double>& truth, double position_offset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
  Scene<double> s = truth;
  for (auto& c : s.primitives) {
    Vec3d dir(g(rng), g(rng), g(rng));
    dir.normalize();
    for (auto& p : c.points) p += position_offset * dir;
    c.raw_delta += uni(-0.2, 0.2);
    c.raw_sigma += uni(-0.2, 0.2);
    c.raw_opacity = logit(uni(0.3, 0.9));
    c.sh.fill(Vec3d::Zero());
    c.sh[0] = rgb_to_sh_dc(Vec3d(uni(0.2, 0.8), uni(0.2, 0.8), uni(0.2, 0.8)));
  }
  return s;
}

/// Sparse coloured point cloud: every defining point, coloured by its primitive.
inline std::vector<ColoredPoint> scene_point_cloud(const Scene<double>& s) {
  std::vector<ColoredPoint> pts;
  for (const auto& c : s.primitives) {
    Vec3d rgb = (Vec3d::Constant(0.5) + sh::kC0 * c.sh[0]).cwiseMax(0.0).cwiseMin(1.0);
    for (const auto& p : c.points) pts.push_back({p, rgb});
  }
  return pts;
}

}  // namespace cvxsplat
