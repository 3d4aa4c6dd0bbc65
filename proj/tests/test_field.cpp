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

#include "cvxsplat/field.hpp"
#include "oracles.hpp"

using namespace cvxsplat;

namespace {

const std::vector<Vec2d> kSquare = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};

}  // namespace

TEST(SmoothSdf, MatchesDirectSum) {
  const auto lines = hull_lines(kSquare);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3, 5);
  for (int i = 0; i < 200; ++i) {
    const Vec2d q(u(rng), u(rng));
    for (double ds : {0.1, 1.0, 4.0})
      EXPECT_NEAR(smooth_sdf(lines, q, ds), oracle::direct_phi(kSquare, q, ds), 1e-12);
  }
}

TEST(SmoothSdf, BoundedByMaxPlusLogCount) {
  const auto lines = hull_lines(kSquare);
  for (double ds : {0.5, 3.0, 50.0}) {
    const Vec2d q(0.7, 1.9);
    double m = -1e300;
    for (const auto& l : lines) m = std::max(m, ds * l.signed_distance(q));
    const double phi = smooth_sdf(lines, q, ds);
    EXPECT_GE(phi, m);
    EXPECT_LE(phi, m + std::log(4.0) + 1e-12);
  }
}

TEST(SmoothSdf, StableForLargeArguments) {
  const auto lines = hull_lines(kSquare);
  const double phi = smooth_sdf(lines, Vec2d(1e4, 1), 1e3);
  EXPECT_TRUE(std::isfinite(phi));
  EXPECT_NEAR(phi, 1e3 * (1e4 - 2), 1e-3);
  EXPECT_TRUE(std::isfinite(smooth_sdf(lines, Vec2d(1, 1), 1e6)));
}

TEST(SmoothSdf, WeightsAreSoftmaxAndGradient) {
  const auto lines = hull_lines(kSquare);
  const Vec2d q(0.3, 2.4);
  const double ds = 1.7;
  std::vector<double> d;
  for (const auto& l : lines) d.push_back(l.signed_distance(q));
  std::vector<double> w(d.size());
  smooth_sdf_weights<double>(d, ds, w);
  double sum = 0;
  for (double x : w) sum += x;
  EXPECT_NEAR(sum, 1, 1e-15);
  // ∂φ/∂L_j = δs · w_j
  for (std::size_t j = 0; j < d.size(); ++j) {
    auto dp = d, dm = d;
    dp[j] += 1e-6;
    dm[j] -= 1e-6;
    const double fd = (smooth_sdf_from_distances<double>(dp, ds) - smooth_sdf_from_distances<double>(dm, ds)) / 2e-6;
    EXPECT_NEAR(fd, ds * w[j], 1e-8);
  }
}

TEST(SmoothSdf, SharpLimitApproachesMaxDistance) {
  const auto lines = hull_lines(kSquare);
  const Vec2d q(1, 0.5);  // distance 0.5 to the bottom edge, 1 to the sides
  EXPECT_NEAR(smooth_sdf(lines, q, 200) / 200, -0.5, 1e-3);
}

TEST(SmoothSdf, PlaneFormCube) {
  std::vector<std::pair<Vec3d, double>> planes;
  for (int a = 0; a < 3; ++a)
    for (double s : {-1.0, 1.0}) {
      Vec3d n = Vec3d::Zero();
      n[a] = s;
      planes.emplace_back(n, -1.0);
    }
  const double ds = 2.0;
  const double expect = std::log(std::exp(-2.0 * 1.5) + std::exp(-2.0 * 0.5) + 4 * std::exp(-2.0));
  EXPECT_NEAR(smooth_sdf_3d(planes, Vec3d(0.5, 0, 0), ds), expect, 1e-14);
  EXPECT_NEAR(signed_distance_3d(planes[1].first, planes[1].second, Vec3d(3, 0, 0)), 2.0, 1e-15);
}

TEST(SmoothSdf, EmptyThrows) {
  EXPECT_THROW(smooth_sdf({}, Vec2d(0, 0), 1.0), std::invalid_argument);
}

TEST(Indicator, HalfAtZeroExactly) {
  for (double s : {1e-3, 0.3, 1.0, 17.0, 1e4}) EXPECT_EQ(indicator(0.0, s), 0.5);
  EXPECT_EQ(indicator(0.0f, 2.0f), 0.5f);
}

TEST(Indicator, Limits) {
  EXPECT_NEAR(indicator(-100.0, 1.0), 1.0, 1e-40);
  EXPECT_LT(indicator(100.0, 1.0), 1e-40);
  EXPECT_NEAR(indicator(std::log(9.0), 1.0), 0.1, 1e-15);
  EXPECT_NEAR(indicator(-std::log(9.0), 1.0), 0.9, 1e-15);
}

TEST(Indicator, FalloffWidthAcrossEdge) {
  // Far from the corners φ ≈ δs·L, so I runs from 0.9 to 0.1 over 2·ln9/(σs·δs).
  const std::vector<Vec2d> big = {{-1000, -1000}, {0, -1000}, {0, 1000}, {-1000, 1000}};
  ProjectedConvex pc;
  pc.hull_vertices = big;
  pc.lines = hull_lines(big);
  pc.depth = 1;
  const double delta = 0.8, sigma = 1.5;
  auto find = [&](double level) {
    double lo = -50, hi = 50;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (evaluate_contribution(pc, Vec2d(mid, 0), delta, sigma, ScalingMode::None) > level ? lo : hi) = mid;
    }
    return lo;
  };
  EXPECT_NEAR(find(0.1) - find(0.9), 2 * std::log(9.0) / (delta * sigma), 1e-9);
}

TEST(Scaling, Factors) {
  EXPECT_EQ(scaling_factor(ScalingMode::None, 4), 1);
  EXPECT_EQ(scaling_factor(ScalingMode::SqrtDepth, 4), 2);
  EXPECT_EQ(scaling_factor(ScalingMode::Depth, 4), 4);
  EXPECT_EQ(scaling_factor(ScalingMode::DepthSquared, 4), 16);
  for (auto m : {ScalingMode::None, ScalingMode::SqrtDepth, ScalingMode::Depth, ScalingMode::DepthSquared}) {
    const double d = 2.5, h = 1e-6;
    EXPECT_NEAR(scaling_factor_derivative(m, d), (scaling_factor(m, d + h) - scaling_factor(m, d - h)) / (2 * h), 1e-8);
    EXPECT_EQ(parse_scaling_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_scaling_mode("linear"), std::invalid_argument);
}
