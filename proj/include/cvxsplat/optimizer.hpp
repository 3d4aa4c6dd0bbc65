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
#include "cvxsplat/scene.hpp"

namespace cvxsplat {

/// Learning rate per parameter group.
struct GroupRates {
  double points{0};
  double delta{0};
  double sigma{0};
  double opacity{0};
  double sh{0};
  double mask{0};
};

/// First and second moments for one parameter group, one row per primitive.
struct MomentTable {
  int width{0};
  std::vector<double> m, v;

  void resize_rows(std::size_t rows) {
    m.assign(rows * width, 0.0);
    v.assign(rows * width, 0.0);
  }

  std::size_t rows() const { return width ? m.size() / width : 0; }

  /// Row i of the result copies row source[i], or starts at zero when source[i] < 0.
  void remap(const std::vector<int>& source) {
    std::vector<double> nm(source.size() * width, 0.0), nv(source.size() * width, 0.0);
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (source[i] < 0) continue;
      for (int j = 0; j < width; ++j) {
        nm[i * width + j] = m[std::size_t(source[i]) * width + j];
        nv[i * width + j] = v[std::size_t(source[i]) * width + j];
      }
    }
    m.swap(nm);
    v.swap(nv);
  }
};

/// Adam over every primitive parameter with per-group learning rates.
class SceneAdam {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-15;

  SceneAdam() = default;
  SceneAdam(std::size_t primitives, std::size_t k) { reset(primitives, k); }

  void reset(std::size_t primitives, std::size_t k) {
    k_ = k;
    points_.width = int(3 * k);
    delta_.width = sigma_.width = opacity_.width = mask_.width = 1;
    sh_.width = 3 * kMaxShCoeffs;
    for (auto* t : tables()) t->resize_rows(primitives);
    steps_ = 0;
  }

  std::size_t rows() const { return points_.rows(); }
  long steps() const { return steps_; }

  void remap(const std::vector<int>& source) {
    for (auto* t : tables()) t->remap(source);
  }

  template <typename T> void step(Scene<T>& scene, const GradientBuffer& grads, const GroupRates& lr) {
    if (grads.size() != scene.size() || rows() != scene.size())
      throw std::invalid_argument("SceneAdam: optimizer rows do not match the scene");
    ++steps_;
    const double bc1 = 1.0 - std::pow(beta1, double(steps_));
    const double bc2 = 1.0 - std::pow(beta2, double(steps_));
    for (std::size_t i = 0; i < scene.size(); ++i) {
      auto& c = scene.primitives[i];
      const auto& g = grads.prims[i];
      for (std::size_t k = 0; k < k_; ++k)
        for (int a = 0; a < 3; ++a) update(points_, i, 3 * k + a, c.points[k][a], g.d_points[k][a], lr.points, bc1, bc2);
      update(delta_, i, 0, c.raw_delta, g.d_raw_delta, lr.delta, bc1, bc2);
      update(sigma_, i, 0, c.raw_sigma, g.d_raw_sigma, lr.sigma, bc1, bc2);
      update(opacity_, i, 0, c.raw_opacity, g.d_raw_opacity, lr.opacity, bc1, bc2);
      update(mask_, i, 0, c.raw_mask, g.d_raw_mask, lr.mask, bc1, bc2);
      for (int s = 0; s < kMaxShCoeffs; ++s)
        for (int ch = 0; ch < 3; ++ch) update(sh_, i, 3 * s + ch, c.sh[s][ch], g.d_sh[s][ch], lr.sh, bc1, bc2);
    }
  }

 private:
  std::vector<MomentTable*> tables() { return {&points_, &delta_, &sigma_, &opacity_, &sh_, &mask_}; }

  template <typename T>
  void update(MomentTable& t, std::size_t row, std::size_t col, T& param, double grad, double lr, double bc1,
              double bc2) {
    double& m = t.m[row * t.width + col];
    double& v = t.v[row * t.width + col];
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad * grad;
    const double mhat = m / bc1, vhat = v / bc2;
    param = T(double(param) - lr * mhat / (std::sqrt(vhat) + eps));
  }

  std::size_t k_{0};
  long steps_{0};
  MomentTable points_, delta_, sigma_, opacity_, sh_, mask_;
};

}  // namespace cvxsplat
