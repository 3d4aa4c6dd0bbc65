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

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxsplat/image.hpp"

namespace cvxsplat::io {

inline double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline const std::array<double, 256>& srgb_byte_table() {
  static const std::array<double, 256> t = [] {
    std::array<double, 256> a{};
    for (int i = 0; i < 256; ++i) a[i] = srgb_to_linear(i / 255.0);
    return a;
  }();
  return t;
}

inline std::uint8_t linear_to_byte(double v) { return std::uint8_t(std::lround(linear_to_srgb(v) * 255.0)); }

inline double byte_to_linear(std::uint8_t b) { return srgb_byte_table()[b]; }

/// Reads an 8-bit PNG as linear RGB in [0, 1].
inline ImageD read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw std::runtime_error("cannot read PNG " + path + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw std::runtime_error("cannot decode PNG " + path + ": " + img.message);
  }
  ImageD out(int(img.width), int(img.height), 3);
  for (std::size_t i = 0; i < buf.size(); ++i) out.values()[i] = byte_to_linear(buf[i]);
  return out;
}

/// Writes linear RGB (or a single grey channel) as 8-bit sRGB PNG.
template <typename T> void write_png(const std::string& path, const Image<T>& im) {
  if (im.channels() != 3 && im.channels() != 1) throw std::invalid_argument("write_png: need 1 or 3 channels");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(im.width());
  img.height = png_uint_32(im.height());
  img.format = im.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(im.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = linear_to_byte(double(im.values()[i]));
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw std::runtime_error("cannot write PNG " + path + ": " + img.message);
}

/// Rounds an image through the 8-bit sRGB encoding used on disk.
template <typename T> Image<T> quantize_srgb8(const Image<T>& im) {
  Image<T> out = im;
  for (auto& v : out.values()) v = T(byte_to_linear(linear_to_byte(double(v))));
  return out;
}

}  // namespace cvxsplat::io
