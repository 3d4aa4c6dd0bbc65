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
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxsplat/backward.hpp"
#include "cvxsplat/config.hpp"
#include "cvxsplat/density.hpp"
#include "cvxsplat/loss.hpp"
#include "cvxsplat/metrics.hpp"
#include "cvxsplat/optimizer.hpp"
#include "cvxsplat/rasterizer.hpp"

namespace cvxsplat {

/// Exponential decay from lr_position_init to lr_position_final.
inline double position_lr(int iteration, const TrainConfig& cfg) {
  if (cfg.total_iterations <= 0) return cfg.lr_position_init;
  const double t = std::clamp(double(iteration) / double(cfg.total_iterations), 0.0, 1.0);
  return cfg.lr_position_init * std::pow(cfg.lr_position_final / cfg.lr_position_init, t);
}

inline RenderOptions render_options(const TrainConfig& cfg) {
  RenderOptions o;
  o.mode = cfg.scaling_mode;
  o.alpha_cutoff = cfg.alpha_cutoff;
  o.transmittance_floor = cfg.transmittance_floor;
  o.mask_threshold = cfg.mask_threshold;
  o.mask_gate = MaskGate::Hard;
  return o;
}

struct View {
  Camera camera;
  ImageD target;
  std::string name;
};

struct IterationLog {
  int iteration{0};
  double loss{0}, l1{0}, dssim{0}, mask{0};
  std::size_t primitive_count{0};
  std::optional<double> psnr;       // mean over training views
  std::optional<double> test_psnr;  // mean over held-out views
};

struct TrainCallbacks {
  std::function<void(const IterationLog&, const Scene<double>&)> on_iteration;
  std::function<void(const DensifyReport&, int)> on_densify;
  // Called with the last good scene before a non-finite loss aborts training.
  std::function<void(const Scene<double>&, int)> on_failure;
};

struct TrainResult {
  std::vector<IterationLog> log;
  double final_loss{0};
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean PSNR of renders against their targets.
inline double mean_psnr(const Scene<double>& scene, const std::vector<View>& views, const RenderOptions& opts) {
  if (views.empty()) return 0.0;
  double s = 0;
  for (const auto& v : views) s += psnr(render(scene, v.camera, opts).image, v.target);
  return s / double(views.size());
}

/// Optimizes `scene` in place against the training views.
inline TrainResult train(Scene<double>& scene, const std::vector<View>& views, const TrainConfig& cfg,
                         const TrainCallbacks& cb = {}, const std::vector<View>& test_views = {}) {
  cfg.validate();
  if (views.empty()) throw std::invalid_argument("train: need at least one training view");
  if (scene.primitives.empty()) throw std::invalid_argument("train: scene has no primitives");
  for (const auto& v : views)
    if (v.target.width() != v.camera.width || v.target.height() != v.camera.height || v.target.channels() != 3)
      throw std::invalid_argument("train: target image of view '" + v.name + "' does not match its camera");

  const RenderOptions opts = render_options(cfg);
  const std::size_t k = scene.k();
  SceneAdam adam(scene.size(), k);
  GradientBuffer accum(scene.size(), k);
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(views.size());
  std::size_t cursor = order.size();

  TrainResult result;
  for (int it = 0; it < cfg.total_iterations; ++it) {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const View& view = views[order[cursor++]];

    const auto rendered = render(scene, view.camera, opts);
    const auto loss = compute_loss(rendered.image, view.target, scene, cfg);
    if (!std::isfinite(loss.total)) {
      if (cb.on_failure) cb.on_failure(scene, it);
      std::ostringstream os;
      os << "train: non-finite loss at iteration " << it << " on view '" << view.name << "' (l1=" << loss.l1
         << ", dssim=" << loss.dssim << ", mask=" << loss.mask << ", primitives=" << scene.size() << ")";
      throw TrainingError(os.str());
    }

    GradientBuffer grads = backward(scene, view.camera, opts, loss.d_image);
    for (std::size_t i = 0; i < scene.size(); ++i) grads.prims[i].d_raw_mask += loss.d_raw_mask[i];
    if (!grads.finite()) {
      if (cb.on_failure) cb.on_failure(scene, it);
      throw TrainingError("train: non-finite gradient at iteration " + std::to_string(it));
    }
    accum.accumulate_sigma_signal(grads);

    GroupRates lr;
    lr.points = position_lr(it, cfg) * (cfg.scale_position_lr_by_extent ? scene.scene_extent : 1.0);
    lr.delta = cfg.lr_delta;
    lr.sigma = cfg.lr_sigma;
    lr.opacity = cfg.lr_opacity;
    lr.sh = cfg.lr_sh;
    lr.mask = cfg.lr_mask;
    adam.step(scene, grads, lr);

    const int done = it + 1;
    if (done >= cfg.densify_start && done % cfg.densify_interval == 0) {
      const auto rep = densify_and_prune(scene, accum, cfg, done);
      adam.remap(rep.source);
      if (cb.on_densify) cb.on_densify(rep, done);
      if (scene.primitives.empty()) throw TrainingError("train: every primitive was pruned");
    }

    IterationLog entry;
    entry.iteration = done;
    entry.loss = loss.total;
    entry.l1 = loss.l1;
    entry.dssim = loss.dssim;
    entry.mask = loss.mask;
    entry.primitive_count = scene.size();
    if ((cfg.eval_interval > 0 && done % cfg.eval_interval == 0) || done == cfg.total_iterations) {
      entry.psnr = mean_psnr(scene, views, opts);
      if (!test_views.empty()) entry.test_psnr = mean_psnr(scene, test_views, opts);
    }
    result.log.push_back(entry);
    if (cb.on_iteration) cb.on_iteration(entry, scene);
  }
  result.final_loss = result.log.empty() ? 0.0 : result.log.back().loss;
  return result;
}

}  // namespace cvxsplat
