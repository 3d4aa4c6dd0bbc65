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
#include <random>
#include <string>
#include <vector>

#include "cvxsplat/backward.hpp"
#include "cvxsplat/config.hpp"
#include "cvxsplat/loss.hpp"
#include "cvxsplat/rasterizer.hpp"

namespace cvxsplat {

struct RandomSceneOptions {
  int primitives = 6;
  int k = 6;
  int width = 32;
  int height = 32;
  int sh_degree = 3;
  double focal = 1.25;  // in units of the image width
  double camera_distance = 4.0;
};

struct RandomScene {
  Scene<double> scene;
  Camera camera;
  ImageD target;
};

/// Seeded random scene in front of a pinhole camera plus a random target image.
inline RandomScene random_scene(std::uint64_t seed, const RandomSceneOptions& o = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };

  RandomScene r;
  r.camera = look_at(Vec3d(0, 0, -o.camera_distance), Vec3d::Zero(), Vec3d(0, -1, 0), o.focal * o.width,
                     o.focal * o.width, o.width, o.height);
  r.scene.sh_degree = o.sh_degree;
  r.scene.background = Vec3d(uni(0, 1), uni(0, 1), uni(0, 1));
  for (int i = 0; i < o.primitives; ++i) {
    SmoothConvex<double> c;
    const Vec3d center(uni(-1, 1), uni(-1, 1), uni(-0.8, 0.8));
    const double radius = uni(0.25, 0.6);
    for (int j = 0; j < o.k; ++j) {
      Vec3d d(gauss(rng), gauss(rng), gauss(rng));
      d.normalize();
      c.points.push_back(center + radius * uni(0.6, 1.0) * d);
    }
    c.raw_delta = std::log(uni(0.05, 0.3));
    c.raw_sigma = std::log(uni(0.05, 0.25));
    c.raw_opacity = uni(-0.5, 2.5);
    c.raw_mask = uni(0.5, 3.0);
    c.sh[0] = Vec3d(uni(-1.2, 1.2), uni(-1.2, 1.2), uni(-1.2, 1.2));
    for (int s = 1; s < sh_coeff_count(o.sh_degree); ++s) c.sh[s] = 0.08 * Vec3d(gauss(rng), gauss(rng), gauss(rng));
    r.scene.primitives.push_back(std::move(c));
  }
  r.target = ImageD(o.width, o.height, 3);
  for (auto& v : r.target.values()) v = uni(0, 1);
  return r;
}

/// Visits every differentiable raw parameter of a scene in a fixed order.
template <typename T, typename F> void for_each_param(Scene<T>& scene, F&& f) {
  const int nsh = sh_coeff_count(scene.sh_degree);
  static const char* axis = "xyz";
  for (std::size_t i = 0; i < scene.size(); ++i) {
    auto& c = scene.primitives[i];
    const std::string p = "prim " + std::to_string(i) + " ";
    for (std::size_t k = 0; k < c.k(); ++k)
      for (int a = 0; a < 3; ++a) f(i, c.points[k][a], p + "point " + std::to_string(k) + "." + axis[a]);
    f(i, c.raw_delta, p + "raw_delta");
    f(i, c.raw_sigma, p + "raw_sigma");
    f(i, c.raw_opacity, p + "raw_opacity");
    f(i, c.raw_mask, p + "raw_mask");
    for (int s = 0; s < nsh; ++s)
      for (int ch = 0; ch < 3; ++ch) f(i, c.sh[s][ch], p + "sh " + std::to_string(s) + "." + "rgb"[ch]);
  }
}

/// The same visiting order over a gradient buffer.
inline std::vector<double> flatten_gradients(const GradientBuffer& g, int sh_degree) {
  std::vector<double> out;
  for (const auto& p : g.prims) {
    for (const auto& v : p.d_points)
      for (int a = 0; a < 3; ++a) out.push_back(v[a]);
    out.push_back(p.d_raw_delta);
    out.push_back(p.d_raw_sigma);
    out.push_back(p.d_raw_opacity);
    out.push_back(p.d_raw_mask);
    for (int s = 0; s < sh_coeff_count(sh_degree); ++s)
      for (int ch = 0; ch < 3; ++ch) out.push_back(p.d_sh[s][ch]);
  }
  return out;
}

struct FdOptions {
  double tolerance = 1e-4;
  double max_flagged_fraction = 0.05;
  double step = 1e-5;  // relative to max(1, |x|)
  RenderOptions render = [] {
    auto o = RenderOptions::exact(ScalingMode::Depth);
    o.mask_gate = MaskGate::Soft;
    return o;
  }();
  TrainConfig loss;
};

struct FdReport {
  std::size_t parameters{0};
  std::size_t checked{0};
  std::size_t flagged{0};
  double max_rel_error{0};
  std::string worst;
  double worst_analytic{0}, worst_numeric{0};

  double flagged_fraction() const { return parameters ? double(flagged) / double(parameters) : 0.0; }
  bool passed(const FdOptions& o) const {
    return max_rel_error < o.tolerance && flagged_fraction() < o.max_flagged_fraction;
  }
  FdReport& operator+=(const FdReport& r) {
    parameters += r.parameters;
    checked += r.checked;
    flagged += r.flagged;
    if (r.max_rel_error > max_rel_error) {
      max_rel_error = r.max_rel_error;
      worst = r.worst;
      worst_analytic = r.worst_analytic;
      worst_numeric = r.worst_numeric;
    }
    return *this;
  }
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

namespace detail {

/// Everything the analytic gradient treats as piecewise constant. A finite
/// difference whose stencil changes any of it is not comparable.
struct DiscreteState {
  std::vector<int> order;
  std::vector<std::vector<int>> hulls;
  std::vector<int> color_clamp;
  std::vector<char> pixel_clamp;
  std::vector<signed char> residual_sign;

  bool operator==(const DiscreteState&) const = default;
};

inline DiscreteState discrete_state(const Scene<double>& scene, const Camera& cam, const RenderOptions& opts,
                                    const ImageD& rendered, const ImageD& target) {
  DiscreteState s;
  for (const auto& p : prepare_view(scene, cam, opts)) {
    s.order.push_back(p.index);
    s.hulls.push_back(p.proj.hull_indices);
    int bits = 0;
    for (int ch = 0; ch < 3; ++ch) bits |= (p.color.unclamped[ch] < 0 ? 1 : 0) << ch;
    s.color_clamp.push_back(bits);
  }
  s.pixel_clamp.reserve(rendered.size());
  s.residual_sign.reserve(rendered.size());
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    const double v = rendered.values()[i];
    s.pixel_clamp.push_back(v <= 0.0 || v >= 1.0);
    const double d = v - target.values()[i];
    s.residual_sign.push_back(d > 0 ? 1 : (d < 0 ? -1 : 0));
  }
  return s;
}

}  // namespace detail

struct LossAndGrad {
  double loss{0};
  GradientBuffer grad;
};

/// Full training loss and its analytic gradient for one view.
inline LossAndGrad loss_and_gradient(const Scene<double>& scene, const Camera& cam, const ImageD& target,
                                     const RenderOptions& opts, const TrainConfig& cfg) {
  const auto out = render(scene, cam, opts);
  const auto l = compute_loss(out.image, target, scene, cfg);
  LossAndGrad r{l.total, backward(scene, cam, opts, l.d_image)};
  for (std::size_t i = 0; i < scene.size(); ++i) r.grad.prims[i].d_raw_mask += l.d_raw_mask[i];
  return r;
}

/// Central finite differences against the analytic gradient for every
/// parameter whose stencil leaves the discrete state unchanged.
inline FdReport fd_check(const Scene<double>& base, const Camera& cam, const ImageD& target, const FdOptions& o = {}) {
  auto eval = [&](const Scene<double>& s, detail::DiscreteState* state) {
    const auto out = render(s, cam, o.render);
    if (state) *state = detail::discrete_state(s, cam, o.render, out.image, target);
    return compute_loss(out.image, target, s, o.loss).total;
  };

  const auto analytic = flatten_gradients(loss_and_gradient(base, cam, target, o.render, o.loss).grad, base.sh_degree);
  detail::DiscreteState ref;
  eval(base, &ref);

  FdReport rep;
  Scene<double> work = base;
  std::size_t idx = 0;
  for_each_param(work, [&](std::size_t, double& x, const std::string& name) {
    const double x0 = x;
    const double h = o.step * std::max(1.0, std::abs(x0));
    detail::DiscreteState sp, sm;
    x = x0 + h;
    const double fp = eval(work, &sp);
    x = x0 - h;
    const double fm = eval(work, &sm);
    x = x0;
    ++rep.parameters;
    const double a = analytic[idx++];
    if (!(sp == ref) || !(sm == ref)) {
      ++rep.flagged;
      return;
    }
    ++rep.checked;
    const double numeric = (fp - fm) / (2 * h);
    const double err = relative_error(a, numeric);
    if (err > rep.max_rel_error || rep.worst.empty()) {
      rep.max_rel_error = std::max(rep.max_rel_error, err);
      if (err >= rep.max_rel_error) {
        rep.worst = name;
        rep.worst_analytic = a;
        rep.worst_numeric = numeric;
      }
    }
  });
  return rep;
}

}  // namespace cvxsplat
