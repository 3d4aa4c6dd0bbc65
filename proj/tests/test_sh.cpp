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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvxsplat/sh.hpp"

using namespace cvxsplat;

namespace {

// Spherical Fibonacci quadrature; equal-area nodes.
std::vector<Vec3d> quadrature_nodes(int n) {
  std::vector<Vec3d> out;
  const double golden = M_PI * (3 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1 - (2.0 * i + 1) / n;
    const double r = std::sqrt(1 - z * z);
    out.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
  }
  return out;
}

}  // namespace

TEST(ShBasis, Orthonormal) {
  const auto nodes = quadrature_nodes(200000);
  std::array<std::array<double, 16>, 16> gram{};
  for (const auto& d : nodes) {
    const auto y = sh::basis(d, 3);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) gram[i][j] += y[i] * y[j];
  }
  const double w = 4 * M_PI / nodes.size();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) EXPECT_NEAR(gram[i][j] * w, i == j ? 1.0 : 0.0, 1e-3) << i << "," << j;
}

TEST(ShBasis, DegreeTruncation) {
  const Vec3d d = Vec3d(0.3, -0.4, 0.5).normalized();
  const auto full = sh::basis(d, 3);
  for (int deg = 0; deg <= 3; ++deg) {
    const auto y = sh::basis(d, deg);
    for (int i = 0; i < 16; ++i) EXPECT_EQ(y[i], i < sh_coeff_count(deg) ? full[i] : 0.0);
  }
}

TEST(ShBasis, ParityMatchesDegree) {
  const Vec3d d = Vec3d(0.7, 0.2, -0.4).normalized();
  const auto a = sh::basis(d, 3), b = sh::basis(-d, 3);
  for (int l = 0; l <= 3; ++l)
    for (int i = l * l; i < (l + 1) * (l + 1); ++i) EXPECT_NEAR(b[i], (l % 2 ? -1 : 1) * a[i], 1e-14);
}

TEST(ShBasis, GradientMatchesFiniteDifference) {
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3d d(n(rng), n(rng), n(rng));
    const auto g = sh::basis_gradient(d, 3);
    for (int a = 0; a < 3; ++a) {
      const double h = 1e-6;
      Vec3d dp = d, dm = d;
      dp[a] += h;
      dm[a] -= h;
      const auto yp = sh::basis(dp, 3), ym = sh::basis(dm, 3);
      for (int i = 0; i < 16; ++i) EXPECT_NEAR(g[i][a], (yp[i] - ym[i]) / (2 * h), 1e-6 * (1 + std::abs(g[i][a])));
    }
  }
}

TEST(ShColor, DcOnlyReproducesColour) {
  SmoothConvex<double> c;
  const Vec3d rgb(0.2, 0.6, 0.9);
  c.sh[0] = rgb_to_sh_dc(rgb);
  for (const Vec3d& d : {Vec3d(1, 0, 0), Vec3d(0, 0, -1), Vec3d(0.6, 0.8, 0)})
    EXPECT_LT((eval_sh_color(c, d, 3) - rgb).norm(), 1e-14);
}

TEST(ShColor, ZeroCoefficientsGiveHalfGrey) {
  SmoothConvex<double> c;
  EXPECT_EQ(eval_sh_color(c, Vec3d::UnitZ(), 3), Vec3d::Constant(0.5));
}

TEST(ShColor, ClampsNegativeToZero) {
  SmoothConvex<double> c;
  c.sh[0] = Vec3d(-10, 0, 10);
  const auto full = eval_sh_color_full(c, Vec3d::UnitX(), 0);
  EXPECT_LT(full.unclamped.x(), 0);
  EXPECT_EQ(full.color.x(), 0.0);
  EXPECT_DOUBLE_EQ(full.color.y(), 0.5);
  EXPECT_GT(full.color.z(), 1.0);
}

TEST(ShColor, HigherBandsIgnoredAtLowDegree) {
  SmoothConvex<double> c;
  c.sh[5] = Vec3d(1, 1, 1);
  const Vec3d d = Vec3d(1, 1, 1).normalized();
  EXPECT_EQ(eval_sh_color(c, d, 1), Vec3d::Constant(0.5));
  EXPECT_NE(eval_sh_color(c, d, 2), Vec3d::Constant(0.5));
}

TEST(ShColor, RejectsNonUnitDirection) {
  SmoothConvex<double> c;
  EXPECT_THROW(eval_sh_color(c, Vec3d(0, 0, 2), 3), std::invalid_argument);
}
