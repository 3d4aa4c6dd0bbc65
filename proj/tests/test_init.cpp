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

#include "cvxsplat/init.hpp"

using namespace cvxsplat;

TEST(FibonacciSphere, PointsOnSphere) {
  const Vec3d c(1, -2, 0.5);
  for (int k : {4, 6, 8, 16}) {
    const auto pts = fibonacci_sphere(k, c, 0.25);
    ASSERT_EQ(int(pts.size()), k);
    for (const auto& p : pts) EXPECT_NEAR((p - c).norm(), 0.25, 1e-14);
  }
}

TEST(FibonacciSphere, KnownFirstPoint) {
  // i = 0: z = 1 - 1/k, longitude 0.
  const auto pts = fibonacci_sphere(6, Vec3d::Zero(), 1.0);
  const double z = 1 - 1.0 / 6;
  EXPECT_NEAR(pts[0].x(), std::sqrt(1 - z * z), 1e-15);
  EXPECT_NEAR(pts[0].y(), 0, 1e-15);
  EXPECT_NEAR(pts[0].z(), z, 1e-15);
}

TEST(FibonacciSphere, CentroidOffsetSmall) {
  // The lattice is not exactly balanced; for K = 6 the mean sits about 0.037·r
  // from the centre.
  for (int k : {6, 32, 256}) {
    const auto pts = fibonacci_sphere(k, Vec3d::Zero(), 1.0);
    Vec3d m = Vec3d::Zero();
    for (const auto& p : pts) m += p;
    const double off = (m / k).norm();
    EXPECT_LT(off, 0.05);
  }
}

TEST(FibonacciSphere, RejectsBadArguments) {
  EXPECT_THROW(fibonacci_sphere(3, Vec3d::Zero(), 1), std::invalid_argument);
  EXPECT_THROW(fibonacci_sphere(6, Vec3d::Zero(), 0), std::invalid_argument);
}

TEST(NeighbourDistance, UnitSquareCorners) {
  std::vector<ColoredPoint> pts = {{{0, 0, 0}, {}}, {{1, 0, 0}, {}}, {{0, 1, 0}, {}}, {{1, 1, 0}, {}}};
  const auto d = mean_neighbour_distance(pts);
  for (double v : d) EXPECT_NEAR(v, (2 + std::sqrt(2.0)) / 3, 1e-15);
}

TEST(InitScene, ParametersFromPointCloud) {
  std::vector<ColoredPoint> pts = {{{0, 0, 0}, {0.2, 0.4, 0.6}},
                                   {{1, 0, 0}, {1, 1, 1}},
                                   {{0, 1, 0}, {0, 0, 0}},
                                   {{1, 1, 0}, {0.5, 0.5, 0.5}}};
  const auto s = init_scene(pts, 6, 2);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.sh_degree, 2);
  const double r = 1.2 * (2 + std::sqrt(2.0)) / 3;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = s.primitives[i];
    EXPECT_EQ(c.k(), 6u);
    for (const auto& p : c.points) EXPECT_NEAR((p - pts[i].position).norm(), r, 1e-12);
    const auto e = effective_params(c);
    EXPECT_NEAR(e.delta, 0.1, 1e-15);
    EXPECT_NEAR(e.sigma, 0.00095, 1e-15);
    EXPECT_NEAR(e.opacity, 0.1, 1e-15);
    EXPECT_GT(e.mask, 0.98);
    const Vec3d rgb = Vec3d::Constant(0.5) + 0.28209479177387814 * c.sh[0];
    EXPECT_LT((rgb - pts[i].color).norm(), 1e-14);
    for (int k = 1; k < 16; ++k) EXPECT_EQ(c.sh[k], Vec3d::Zero());
  }
}

TEST(InitScene, CoincidentPointsGetMinimumRadius) {
  std::vector<ColoredPoint> pts(5, {{2, 2, 2}, {0.5, 0.5, 0.5}});
  const auto s = init_scene(pts, 6);
  EXPECT_NEAR((s.primitives[0].points[0] - Vec3d(2, 2, 2)).norm(), 1e-3, 1e-15);
}

TEST(InitScene, RejectsTooFewPointsAndBadDegree) {
  std::vector<ColoredPoint> pts(3, {{0, 0, 0}, {}});
  EXPECT_THROW(init_scene(pts, 6), std::invalid_argument);
  pts.resize(4);
  EXPECT_THROW(init_scene(pts, 6, 4), std::invalid_argument);
}

TEST(InitScene, FloatScene) {
  std::vector<ColoredPoint> pts = {{{0, 0, 0}, {}}, {{1, 0, 0}, {}}, {{0, 1, 0}, {}}, {{0, 0, 1}, {}}};
  const auto s = init_scene<float>(pts, 8);
  EXPECT_EQ(s.primitives[3].k(), 8u);
}
