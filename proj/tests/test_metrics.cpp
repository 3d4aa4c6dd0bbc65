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

#include "cvxsplat/metrics.hpp"

using namespace cvxsplat;

namespace {

ImageD random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  ImageD img(w, h, 3);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

}  // namespace

TEST(Ssim, IdenticalIsOne) {
  const auto a = random_image(20, 17, 1);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, ConstantImagesClosedForm) {
  // Zero variance everywhere: SSIM = (2μaμb + C1) / (μa² + μb² + C1).
  const ImageD a(16, 16, 3, 0.4), b(16, 16, 3, 0.5);
  const double expect = (2 * 0.4 * 0.5 + kSsimC1) / (0.4 * 0.4 + 0.5 * 0.5 + kSsimC1);
  EXPECT_NEAR(ssim(a, b), expect, 1e-12);
}

TEST(Ssim, InvertedCheckerboardNegative) {
  ImageD a(16, 16, 1), b(16, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      a(x, y) = (x + y) % 2;
      b(x, y) = 1 - a(x, y);
    }
  EXPECT_LT(ssim(a, b), 0.0);
}

TEST(Ssim, Symmetric) {
  const auto a = random_image(12, 12, 2), b = random_image(12, 12, 3);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
}

TEST(Ssim, GradientMatchesFiniteDifference) {
  auto a = random_image(13, 11, 4);
  const auto b = random_image(13, 11, 5);
  const auto g = ssim_with_grad(a, b, true).grad;
  std::mt19937 rng(6);
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  for (int t = 0; t < 60; ++t) {
    const std::size_t i = t < 3 ? t : pick(rng);  // include corner pixels
    const double x0 = a.values()[i], h = 1e-6;
    a.values()[i] = x0 + h;
    const double fp = ssim(a, b);
    a.values()[i] = x0 - h;
    const double fm = ssim(a, b);
    a.values()[i] = x0;
    EXPECT_NEAR(g.values()[i], (fp - fm) / (2 * h), 1e-9) << i;
  }
}

TEST(Ssim, SmallerThanWindow) {
  const auto a = random_image(3, 2, 7), b = random_image(3, 2, 8);
  const double s = ssim(a, b);
  EXPECT_TRUE(std::isfinite(s));
  EXPECT_LE(s, 1.0);
}

TEST(Ssim, ShapeMismatchThrows) {
  EXPECT_THROW(ssim(ImageD(4, 4, 3), ImageD(4, 5, 3)), std::invalid_argument);
  EXPECT_THROW(ssim(ImageD(0, 0, 3), ImageD(0, 0, 3)), std::invalid_argument);
}

TEST(Psnr, KnownOffset) {
  const ImageD a(8, 8, 3, 0.3), b(8, 8, 3, 0.4);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
  EXPECT_NEAR(mse(a, b), 0.01, 1e-15);
}

TEST(Psnr, IdenticalCapped) {
  const auto a = random_image(5, 5, 9);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
}

TEST(GaussianWindow, NormalisedAndSymmetric) {
  const auto w = detail::gaussian_window();
  double s = 0;
  for (double v : w) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);
  for (int i = 0; i < 11; ++i) EXPECT_DOUBLE_EQ(w[i], w[10 - i]);
  EXPECT_NEAR(w[5] / w[6], std::exp(1.0 / (2 * 1.5 * 1.5)), 1e-12);
}
