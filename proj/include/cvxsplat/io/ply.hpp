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
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxsplat/init.hpp"

namespace cvxsplat::io {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlyPoint {
  Vec3d position;
  std::array<std::uint8_t, 3> rgb;  // 8-bit sRGB
};

namespace detail {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline bool parse_ply_type(const std::string& s, PlyType& t) {
  if (s == "char" || s == "int8") t = PlyType::Int8;
  else if (s == "uchar" || s == "uint8") t = PlyType::UInt8;
  else if (s == "short" || s == "int16") t = PlyType::Int16;
  else if (s == "ushort" || s == "uint16") t = PlyType::UInt16;
  else if (s == "int" || s == "int32") t = PlyType::Int32;
  else if (s == "uint" || s == "uint32") t = PlyType::UInt32;
  else if (s == "float" || s == "float32") t = PlyType::Float32;
  else if (s == "double" || s == "float64") t = PlyType::Float64;
  else return false;
  return true;
}

inline int ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

template <typename U> U load_scalar(const unsigned char* p, bool big_endian) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, p, sizeof(U));
  if (big_endian != (std::endian::native == std::endian::big)) std::reverse(b, b + sizeof(U));
  U v;
  std::memcpy(&v, b, sizeof(U));
  return v;
}

inline double decode(PlyType t, const unsigned char* p, bool big) {
  switch (t) {
    case PlyType::Int8: return double(load_scalar<std::int8_t>(p, big));
    case PlyType::UInt8: return double(load_scalar<std::uint8_t>(p, big));
    case PlyType::Int16: return double(load_scalar<std::int16_t>(p, big));
    case PlyType::UInt16: return double(load_scalar<std::uint16_t>(p, big));
    case PlyType::Int32: return double(load_scalar<std::int32_t>(p, big));
    case PlyType::UInt32: return double(load_scalar<std::uint32_t>(p, big));
    case PlyType::Float32: return double(load_scalar<float>(p, big));
    case PlyType::Float64: return load_scalar<double>(p, big);
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  bool is_list{false};
  PlyType count_type{PlyType::UInt8};
};

struct PlyElement {
  std::string name;
  std::size_t count{0};
  std::vector<PlyProperty> props;
};

inline double color_to_byte(double v, PlyType t) {
  // Float colours are taken to be in [0, 1].
  if (t == PlyType::Float32 || t == PlyType::Float64) v *= 255.0;
  return std::clamp(std::round(v), 0.0, 255.0);
}

}  // namespace detail

/// Reads x, y, z, red, green, blue from the vertex element of an ASCII or
/// binary PLY stream.
inline std::vector<PlyPoint> read_ply(std::istream& in, const std::string& source = "ply") {
  using namespace detail;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw fail("unexpected end of header");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line();
  if (line != "ply") throw fail("missing 'ply' magic");
  enum class Format { Ascii, BinaryLE, BinaryBE } format = Format::Ascii;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    next_line();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      std::string f, ver;
      ls >> f >> ver;
      if (f == "ascii") format = Format::Ascii;
      else if (f == "binary_little_endian") format = Format::BinaryLE;
      else if (f == "binary_big_endian") format = Format::BinaryBE;
      else throw fail("unknown format '" + f + "'");
      have_format = true;
    } else if (kw == "element") {
      PlyElement e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0) throw fail("malformed element line");
      e.count = std::size_t(count);
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw fail("property before any element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        if (!parse_ply_type(ct, p.count_type) || !parse_ply_type(it, p.type)) throw fail("bad list property types");
        p.is_list = true;
      } else {
        if (!parse_ply_type(t, p.type)) throw fail("unknown property type '" + t + "'");
        ls >> p.name;
      }
      if (p.name.empty()) throw fail("property without a name");
      elements.back().props.push_back(p);
    } else {
      throw fail("unexpected header keyword '" + kw + "'");
    }
  }
  if (!have_format) throw fail("missing format line");

  const auto vit = std::find_if(elements.begin(), elements.end(), [](const auto& e) { return e.name == "vertex"; });
  if (vit == elements.end()) throw fail("no vertex element");
  const char* wanted[6] = {"x", "y", "z", "red", "green", "blue"};
  int slot[6];
  for (int w = 0; w < 6; ++w) {
    slot[w] = -1;
    for (std::size_t i = 0; i < vit->props.size(); ++i)
      if (vit->props[i].name == wanted[w] && !vit->props[i].is_list) slot[w] = int(i);
    if (slot[w] < 0) {
      // Some writers use diffuse_* for colour.
      const std::string alt = std::string("diffuse_") + wanted[w];
      for (std::size_t i = 0; i < vit->props.size(); ++i)
        if (vit->props[i].name == alt && !vit->props[i].is_list) slot[w] = int(i);
    }
    if (slot[w] < 0) throw ParseError(source + ": vertex element is missing property '" + wanted[w] + "'");
  }

  std::vector<PlyPoint> out;
  out.reserve(vit->count);
  std::vector<double> values;
  auto emit = [&](const PlyElement& e) {
    PlyPoint p;
    for (int a = 0; a < 3; ++a) p.position[a] = values[slot[a]];
    for (int a = 0; a < 3; ++a)
      p.rgb[a] = std::uint8_t(color_to_byte(values[slot[3 + a]], e.props[slot[3 + a]].type));
    out.push_back(p);
  };

  if (format == Format::Ascii) {
    for (const auto& e : elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        if (!std::getline(in, line)) throw fail("unexpected end of data in element '" + e.name + "'");
        ++lineno;
        std::istringstream ls(line);
        values.assign(e.props.size(), 0.0);
        for (std::size_t i = 0; i < e.props.size(); ++i) {
          if (e.props[i].is_list) {
            long long n;
            if (!(ls >> n)) throw fail("bad list count");
            for (long long q = 0; q < n; ++q) {
              double skip;
              if (!(ls >> skip)) throw fail("bad list entry");
            }
            continue;
          }
          if (!(ls >> values[i])) throw fail("expected " + std::to_string(e.props.size()) + " values");
        }
        if (&e == &*vit) emit(e);
      }
    }
  } else {
    const bool big = format == Format::BinaryBE;
    std::vector<unsigned char> buf(8);
    std::size_t offset = 0;  // bytes consumed after end_header
    auto read_bytes = [&](int n) {
      if (!in.read(reinterpret_cast<char*>(buf.data()), n))
        throw ParseError(source + ": unexpected end of binary data at byte offset " + std::to_string(offset) +
                         " after the header");
      offset += std::size_t(n);
    };
    for (const auto& e : elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        values.assign(e.props.size(), 0.0);
        for (std::size_t i = 0; i < e.props.size(); ++i) {
          const auto& p = e.props[i];
          if (p.is_list) {
            read_bytes(ply_type_size(p.count_type));
            const double n = decode(p.count_type, buf.data(), big);
            for (long long q = 0; q < (long long)n; ++q) read_bytes(ply_type_size(p.type));
            continue;
          }
          read_bytes(ply_type_size(p.type));
          values[i] = decode(p.type, buf.data(), big);
        }
        if (&e == &*vit) emit(e);
      }
    }
  }
  return out;
}

inline std::vector<PlyPoint> read_ply_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_ply(in, path);
}

/// Writes a binary little-endian PLY with float positions and uchar colour.
inline void write_ply(std::ostream& out, const std::vector<PlyPoint>& pts, bool binary = true) {
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << pts.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const auto& p : pts) {
    if (binary) {
      for (int a = 0; a < 3; ++a) {
        float f = float(p.position[a]);
        unsigned char b[4];
        std::memcpy(b, &f, 4);
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 4);
        out.write(reinterpret_cast<const char*>(b), 4);
      }
      out.write(reinterpret_cast<const char*>(p.rgb.data()), 3);
    } else {
      out.precision(9);
      out << p.position.x() << " " << p.position.y() << " " << p.position.z() << " " << int(p.rgb[0]) << " "
          << int(p.rgb[1]) << " " << int(p.rgb[2]) << "\n";
    }
  }
}

inline void write_ply_file(const std::string& path, const std::vector<PlyPoint>& pts, bool binary = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_ply(out, pts, binary);
}

}  // namespace cvxsplat::io
