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
#include <stdexcept>
#include <vector>

#include "cvxsplat/backward.hpp"
#include "cvxsplat/config.hpp"
#include "cvxsplat/scene.hpp"

namespace cvxsplat {

/// Splits a parent into K children, one centred on each defining point.
template <typename T>
std::vector<SmoothConvex<T>> split_convex(const SmoothConvex<T>& parent, double scale, double sigma_boost,
                                          double opacity_factor) {
  if (!(scale > 0) || scale > 1) throw std::invalid_argument("split_convex: scale must be in (0, 1]");
  if (!(sigma_boost >= 1)) throw std::invalid_argument("split_convex: sigma_boost must be >= 1");
  if (!(opacity_factor > 0) || opacity_factor > 1)
    throw std::invalid_argument("split_convex: opacity_factor must be in (0, 1]");
  if (parent.points.empty()) throw std::invalid_argument("split_convex: parent has no points");

  const Vec3d c = convex_center(parent);
  const double child_opacity = sigmoid(double(parent.raw_opacity)) * opacity_factor;
  const T raw_opacity = T(logit(child_opacity));
  const T raw_sigma = T(double(parent.raw_sigma) + std::log(sigma_boost));

  std::vector<SmoothConvex<T>> children;
  children.reserve(parent.k());
  for (std::size_t i = 0; i < parent.k(); ++i) {
    SmoothConvex<T> child = parent;
    const Vec3d anchor = parent.points[i].template cast<double>();
    for (std::size_t j = 0; j < parent.k(); ++j)
      child.points[j] = (anchor + scale * (parent.points[j].template cast<double>() - c)).template cast<T>();
    child.raw_sigma = raw_sigma;
    child.raw_opacity = raw_opacity;
    children.push_back(std::move(child));
  }
  return children;
}

struct DensifyReport {
  int split{0};
  int added{0};
  int pruned_opacity{0};
  int pruned_size{0};
  int pruned_mask{0};
  std::size_t before{0};
  std::size_t after{0};
  // source[i] is the pre-call index of surviving primitive i, or -1 for a new child.
  std::vector<int> source;
};

/// Splits primitives with a large mean σ-gradient signal, then prunes
/// transparent, oversized and masked-out primitives. Resets the σ statistics.
template <typename T>
DensifyReport densify_and_prune(Scene<T>& scene, GradientBuffer& accum, const TrainConfig& cfg, int iteration) {
  if (accum.size() != scene.size()) throw std::invalid_argument("densify_and_prune: accumulator size mismatch");
  DensifyReport rep;
  rep.before = scene.size();

  std::vector<SmoothConvex<T>> next;
  std::vector<int> source;
  next.reserve(scene.size());
  std::vector<SmoothConvex<T>> children;
  const bool may_split = iteration <= cfg.densify_stop;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (may_split && accum.sigma_signal(i) > cfg.sigma_loss_threshold) {
      auto kids = split_convex(scene.primitives[i], cfg.split_scale, cfg.sigma_boost, cfg.opacity_factor);
      ++rep.split;
      rep.added += int(kids.size());
      for (auto& k : kids) children.push_back(std::move(k));
    } else {
      next.push_back(scene.primitives[i]);
      source.push_back(int(i));
    }
  }
  for (auto& k : children) {
    next.push_back(std::move(k));
    source.push_back(-1);
  }

  const double max_size = cfg.prune_size_fraction * scene.scene_extent;
  std::vector<SmoothConvex<T>> kept;
  kept.reserve(next.size());
  for (std::size_t i = 0; i < next.size(); ++i) {
    const auto eff = effective_params(next[i]);
    if (eff.opacity < cfg.prune_opacity) {
      ++rep.pruned_opacity;
    } else if (convex_diameter(next[i]) > max_size) {
      ++rep.pruned_size;
    } else if (eff.mask <= cfg.mask_threshold) {
      ++rep.pruned_mask;
    } else {
      kept.push_back(std::move(next[i]));
      rep.source.push_back(source[i]);
    }
  }
  scene.primitives = std::move(kept);
  rep.after = scene.size();

  const std::size_t k = scene.k() ? scene.k() : (accum.prims.empty() ? 0 : accum.prims.front().d_points.size());
  accum = GradientBuffer(scene.size(), k);
  return rep;
}

}  // namespace cvxsplat
