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
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxsplat/io/half.hpp"
#include "cvxsplat/scene.hpp"

namespace cvxsplat::io {

inline constexpr char kCheckpointMagic[4] = {'3', 'D', 'C', 'S'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class Precision : std::uint32_t { Float32 = 32, Float16 = 16 };

inline Precision parse_precision(int bits) {
  if (bits == 32) return Precision::Float32;
  if (bits == 16) return Precision::Float16;
  throw std::invalid_argument("precision must be 32 or 16, got " + std::to_string(bits));
}

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename U> void put_le(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U> U get_le(std::istream& in, const char* what) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U)))
    throw CheckpointError(std::string("checkpoint: truncated while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  U v;
  std::memcpy(&v, b, sizeof(U));
  return v;
}

inline void put_real(std::ostream& out, double v, Precision p) {
  if (p == Precision::Float32) put_le<float>(out, float(v));
  else put_le<std::uint16_t>(out, float_to_half(float(v)));
}

inline double get_real(std::istream& in, Precision p) {
  if (p == Precision::Float32) return double(get_le<float>(in, "parameters"));
  return double(half_to_float(get_le<std::uint16_t>(in, "parameters")));
}

}  // namespace detail

/// Header fields: magic, version, K, SH degree, primitive count, precision,
/// scene extent, background; then per primitive the raw parameters.
template <typename T> void save_checkpoint(std::ostream& out, const Scene<T>& scene, Precision p) {
  using namespace detail;
  const std::size_t k = scene.k();
  for (const auto& c : scene.primitives)
    if (c.k() != k) throw CheckpointError("checkpoint: primitives have different point counts");
  out.write(kCheckpointMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, std::uint32_t(k));
  put_le<std::uint32_t>(out, std::uint32_t(scene.sh_degree));
  put_le<std::uint64_t>(out, std::uint64_t(scene.size()));
  put_le<std::uint32_t>(out, std::uint32_t(p));
  put_le<float>(out, float(scene.scene_extent));
  for (int a = 0; a < 3; ++a) put_le<float>(out, float(scene.background[a]));
  const int nsh = sh_coeff_count(scene.sh_degree);
  for (const auto& c : scene.primitives) {
    for (const auto& pt : c.points)
      for (int a = 0; a < 3; ++a) put_real(out, double(pt[a]), p);
    put_real(out, double(c.raw_delta), p);
    put_real(out, double(c.raw_sigma), p);
    put_real(out, double(c.raw_opacity), p);
    put_real(out, double(c.raw_mask), p);
    for (int s = 0; s < nsh; ++s)
      for (int ch = 0; ch < 3; ++ch) put_real(out, double(c.sh[s][ch]), p);
  }
  if (!out) throw CheckpointError("checkpoint: write failed");
}

template <typename T = double> Scene<T> load_checkpoint(std::istream& in) {
  using namespace detail;
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw CheckpointError("checkpoint: bad magic, not a 3DCS file");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported format version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto k = get_le<std::uint32_t>(in, "K");
  const auto deg = get_le<std::uint32_t>(in, "SH degree");
  const auto count = get_le<std::uint64_t>(in, "primitive count");
  const auto prec = get_le<std::uint32_t>(in, "precision");
  if (deg > std::uint32_t(kMaxShDegree)) throw CheckpointError("checkpoint: SH degree out of range");
  if (prec != 32 && prec != 16) throw CheckpointError("checkpoint: unknown precision " + std::to_string(prec));
  if (k > 4096) throw CheckpointError("checkpoint: implausible point count " + std::to_string(k));
  const Precision p = Precision(prec);

  Scene<T> scene;
  scene.sh_degree = int(deg);
  scene.scene_extent = double(get_le<float>(in, "scene extent"));
  for (int a = 0; a < 3; ++a) scene.background[a] = double(get_le<float>(in, "background"));
  const int nsh = sh_coeff_count(scene.sh_degree);
  scene.primitives.reserve(std::size_t(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    SmoothConvex<T> c;
    c.points.resize(k);
    for (auto& pt : c.points)
      for (int a = 0; a < 3; ++a) pt[a] = T(get_real(in, p));
    c.raw_delta = T(get_real(in, p));
    c.raw_sigma = T(get_real(in, p));
    c.raw_opacity = T(get_real(in, p));
    c.raw_mask = T(get_real(in, p));
    for (int s = 0; s < nsh; ++s)
      for (int ch = 0; ch < 3; ++ch) c.sh[s][ch] = T(get_real(in, p));
    scene.primitives.push_back(std::move(c));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint: trailing bytes after data");
  return scene;
}

template <typename T> void save_checkpoint_file(const std::string& path, const Scene<T>& scene, Precision p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  save_checkpoint(out, scene, p);
}

template <typename T = double> Scene<T> load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  try {
    return load_checkpoint<T>(in);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

/// Rounds every stored value through the checkpoint precision.
template <typename T> Scene<T> round_trip(const Scene<T>& scene, Precision p) {
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  save_checkpoint(ss, scene, p);
  return load_checkpoint<T>(ss);
}

}  // namespace cvxsplat::io
