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
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cvxsplat/math.hpp"

namespace cvxsplat {

/// H×W×C interleaved image, row-major.
template <typename T> class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 3, T fill = T(0))
      : width_(width), height_(height), channels_(channels),
        data_(std::size_t(width) * std::size_t(height) * std::size_t(channels), fill) {
    if (width < 0 || height < 0 || channels < 1) throw std::invalid_argument("Image: bad dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  template <typename U> Image<U> cast() const {
    Image<U> out(width_, height_, channels_);
    std::transform(data_.begin(), data_.end(), out.values().begin(), [](T v) { return U(v); });
    return out;
  }

 private:
  std::size_t index(int x, int y, int c) const {
    return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_) + std::size_t(c);
  }

  int width_{0}, height_{0}, channels_{0};
  std::vector<T> data_;
};

using ImageF = Image<float>;
using ImageD = Image<double>;

/// Draws a one-pixel line by DDA; pixels outside the image are skipped.
template <typename T>
void draw_line(Image<T>& img, const Vec2d& a, const Vec2d& b, const Vec3d& rgb) {
  const Vec2d d = b - a;
  const int steps = std::max(1, int(std::ceil(std::max(std::abs(d.x()), std::abs(d.y())))));
  for (int i = 0; i <= steps; ++i) {
    const Vec2d p = a + d * (double(i) / steps);
    const int x = int(std::floor(p.x())), y = int(std::floor(p.y()));
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
    for (int c = 0; c < std::min(3, img.channels()); ++c) img(x, y, c) = T(rgb[c]);
  }
}

template <typename T> void draw_dot(Image<T>& img, const Vec2d& p, int radius, const Vec3d& rgb) {
  const int cx = int(std::floor(p.x())), cy = int(std::floor(p.y()));
  for (int y = cy - radius; y <= cy + radius; ++y)
    for (int x = cx - radius; x <= cx + radius; ++x) {
      if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
      for (int c = 0; c < std::min(3, img.channels()); ++c) img(x, y, c) = T(rgb[c]);
    }
}

}  // namespace cvxsplat
