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

#include "cvxsplat/config.hpp"
#include "cvxsplat/metrics.hpp"
#include "cvxsplat/scene.hpp"

namespace cvxsplat {

template <typename T> struct LossResult {
  double total{0};
  double l1{0};
  double dssim{0};
  double mask{0};
  Image<T> d_image;                // ∂[(1-λ)L1 + λ·L_DSSIM] / ∂pixel
  std::vector<double> d_raw_mask;  // ∂[β·L_m] / ∂raw_mask per primitive
};

/// L = (1-λ)·L1 + λ·(1 - SSIM)/2 + β·mean(sigmoid(raw_mask)).
template <typename T>
LossResult<T> compute_loss(const Image<T>& rendered, const Image<T>& target, const Scene<T>& scene,
                           const TrainConfig& cfg) {
  if (!rendered.same_shape(target)) throw std::invalid_argument("loss: rendered and target shapes differ");
  LossResult<T> r;
  const std::size_t n = rendered.size();
  const double lambda = cfg.lambda_dssim;

  auto s = ssim_with_grad(rendered, target, true);
  r.dssim = (1.0 - s.value) / 2.0;
  r.d_image = Image<T>(rendered.width(), rendered.height(), rendered.channels());
  double l1 = 0;
  const double inv_n = 1.0 / double(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double(rendered.values()[i]) - double(target.values()[i]);
    l1 += std::abs(d);
    const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    r.d_image.values()[i] = T((1.0 - lambda) * sign * inv_n - lambda * 0.5 * double(s.grad.values()[i]));
  }
  r.l1 = l1 * inv_n;

  r.d_raw_mask.assign(scene.size(), 0.0);
  if (!scene.primitives.empty()) {
    double sum = 0;
    for (std::size_t i = 0; i < scene.size(); ++i) {
      const double m = sigmoid(double(scene.primitives[i].raw_mask));
      sum += m;
      r.d_raw_mask[i] = cfg.beta_mask * m * (1.0 - m) / double(scene.size());
    }
    r.mask = sum / double(scene.size());
  }
  r.total = (1.0 - lambda) * r.l1 + lambda * r.dssim + cfg.beta_mask * r.mask;
  return r;
}

}  // namespace cvxsplat
