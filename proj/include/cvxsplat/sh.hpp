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

#include <array>
#include <cmath>
#include <stdexcept>

#include "cvxsplat/scene.hpp"

namespace cvxsplat {

namespace sh {

inline constexpr double kC0 = 0.28209479177387814;
inline constexpr double kC1 = 0.4886025119029199;
inline constexpr std::array<double, 5> kC2 = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                                              -1.0925484305920792, 0.5462742152960396};
inline constexpr std::array<double, 7> kC3 = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                                              0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                                              -0.5900435899266435};

/// Real SH basis values up to degree 3; entries above `degree` are zero.
inline std::array<double, kMaxShCoeffs> basis(const Vec3d& d, int degree) {
  std::array<double, kMaxShCoeffs> y{};
  const double x = d.x(), yy_ = d.y(), z = d.z();
  y[0] = kC0;
  if (degree < 1) return y;
  y[1] = -kC1 * yy_;
  y[2] = kC1 * z;
  y[3] = -kC1 * x;
  if (degree < 2) return y;
  const double xx = x * x, yy = yy_ * yy_, zz = z * z;
  y[4] = kC2[0] * x * yy_;
  y[5] = kC2[1] * yy_ * z;
  y[6] = kC2[2] * (2 * zz - xx - yy);
  y[7] = kC2[3] * x * z;
  y[8] = kC2[4] * (xx - yy);
  if (degree < 3) return y;
  y[9] = kC3[0] * yy_ * (3 * xx - yy);
  y[10] = kC3[1] * x * yy_ * z;
  y[11] = kC3[2] * yy_ * (4 * zz - xx - yy);
  y[12] = kC3[3] * z * (2 * zz - 3 * xx - 3 * yy);
  y[13] = kC3[4] * x * (4 * zz - xx - yy);
  y[14] = kC3[5] * z * (xx - yy);
  y[15] = kC3[6] * x * (xx - 3 * yy);
  return y;
}

/// Partial derivatives of each basis function with respect to the (unnormalised)
/// direction components.
inline std::array<Vec3d, kMaxShCoeffs> basis_gradient(const Vec3d& d, int degree) {
  std::array<Vec3d, kMaxShCoeffs> g;
  g.fill(Vec3d::Zero());
  const double x = d.x(), y = d.y(), z = d.z();
  if (degree < 1) return g;
  g[1] = {0, -kC1, 0};
  g[2] = {0, 0, kC1};
  g[3] = {-kC1, 0, 0};
  if (degree < 2) return g;
  const double xx = x * x, yy = y * y, zz = z * z;
  g[4] = kC2[0] * Vec3d(y, x, 0);
  g[5] = kC2[1] * Vec3d(0, z, y);
  g[6] = kC2[2] * Vec3d(-2 * x, -2 * y, 4 * z);
  g[7] = kC2[3] * Vec3d(z, 0, x);
  g[8] = kC2[4] * Vec3d(2 * x, -2 * y, 0);
  if (degree < 3) return g;
  g[9] = kC3[0] * Vec3d(6 * x * y, 3 * xx - 3 * yy, 0);
  g[10] = kC3[1] * Vec3d(y * z, x * z, x * y);
  g[11] = kC3[2] * Vec3d(-2 * x * y, 4 * zz - xx - 3 * yy, 8 * y * z);
  g[12] = kC3[3] * Vec3d(-6 * x * z, -6 * y * z, 6 * zz - 3 * xx - 3 * yy);
  g[13] = kC3[4] * Vec3d(4 * zz - 3 * xx - yy, -2 * x * y, 8 * x * z);
  g[14] = kC3[5] * Vec3d(2 * x * z, -2 * y * z, xx - yy);
  g[15] = kC3[6] * Vec3d(3 * xx - 3 * yy, -6 * x * y, 0);
  return g;
}

}  // namespace sh

struct ShColor {
  Vec3d unclamped;  // 0.5 + Σ c·Y
  Vec3d color;      // max(0, unclamped)
};

template <typename T> ShColor eval_sh_color_full(const SmoothConvex<T>& c, const Vec3d& view_dir, int degree) {
  if (std::abs(view_dir.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("eval_sh_color: view direction must be unit length");
  const auto y = sh::basis(view_dir, degree);
  const int n = sh_coeff_count(degree);
  Vec3d acc = Vec3d::Constant(0.5);
  for (int i = 0; i < n; ++i) acc += y[i] * c.sh[i].template cast<double>();
  return {acc, acc.cwiseMax(0.0)};
}

template <typename T> Vec3d eval_sh_color(const SmoothConvex<T>& c, const Vec3d& view_dir, int degree = 3) {
  return eval_sh_color_full(c, view_dir, degree).color;
}

/// DC coefficient that reproduces `rgb` under the 0.5-offset convention.
inline Vec3d rgb_to_sh_dc(const Vec3d& rgb) { return (rgb - Vec3d::Constant(0.5)) / sh::kC0; }

}  // namespace cvxsplat
