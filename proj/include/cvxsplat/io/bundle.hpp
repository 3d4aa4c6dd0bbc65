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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvxsplat/init.hpp"
#include "cvxsplat/io/ply.hpp"
#include "cvxsplat/io/png.hpp"
#include "cvxsplat/scene.hpp"
#include "cvxsplat/trainer.hpp"

namespace cvxsplat::io {

enum class Split { Train, Test };

struct BundleCamera {
  Camera camera;
  std::string image;  // relative to the bundle directory
  Split split{Split::Train};
};

struct SceneBundle {
  std::filesystem::path root;
  std::vector<BundleCamera> cameras;
  std::string points_file;
  std::vector<ColoredPoint> points;
  Vec3d background = Vec3d::Zero();
};

inline ColoredPoint to_colored(const PlyPoint& p) {
  return {p.position, Vec3d(byte_to_linear(p.rgb[0]), byte_to_linear(p.rgb[1]), byte_to_linear(p.rgb[2]))};
}

inline PlyPoint to_ply(const ColoredPoint& p) {
  return {p.position, {linear_to_byte(p.color[0]), linear_to_byte(p.color[1]), linear_to_byte(p.color[2])}};
}

namespace detail {

inline std::string json_location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col) + " (byte " + std::to_string(byte) + ")";
}

inline Camera camera_from_json(const nlohmann::json& j, std::size_t index) {
  const std::string where = "cameras[" + std::to_string(index) + "]";
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ParseError("bundle: " + where + " is missing field '" + key + "'");
    return j.at(key);
  };
  Camera c;
  try {
    c.fx = need("fx").get<double>();
    c.fy = need("fy").get<double>();
    c.cx = need("cx").get<double>();
    c.cy = need("cy").get<double>();
    c.width = need("width").get<int>();
    c.height = need("height").get<int>();
    const auto R = need("R").get<std::vector<double>>();
    const auto t = need("t").get<std::vector<double>>();
    if (R.size() != 9) throw ParseError("bundle: " + where + ".R must have 9 entries");
    if (t.size() != 3) throw ParseError("bundle: " + where + ".t must have 3 entries");
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 3; ++q) c.R(r, q) = R[3 * r + q];
    c.t = Vec3d(t[0], t[1], t[2]);
    if (j.contains("z_near")) c.z_near = j.at("z_near").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bundle: " + where + ": " + e.what());
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError("bundle: " + where + ": " + e.what());
  }
  return c;
}

}  // namespace detail

inline nlohmann::json camera_to_json(const Camera& c) {
  nlohmann::json j;
  j["fx"] = c.fx;
  j["fy"] = c.fy;
  j["cx"] = c.cx;
  j["cy"] = c.cy;
  j["width"] = c.width;
  j["height"] = c.height;
  std::vector<double> R(9);
  for (int r = 0; r < 3; ++r)
    for (int q = 0; q < 3; ++q) R[3 * r + q] = c.R(r, q);
  j["R"] = R;
  j["t"] = {c.t.x(), c.t.y(), c.t.z()};
  return j;
}

/// Parses the bundle JSON document. Images are not read here.
inline SceneBundle parse_bundle(const std::string& text, const std::filesystem::path& root, bool load_points = true) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("bundle: malformed JSON at " + detail::json_location(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array())
    throw ParseError("bundle: top level must be an object with a 'cameras' array");
  SceneBundle b;
  b.root = root;
  for (std::size_t i = 0; i < doc["cameras"].size(); ++i) {
    const auto& jc = doc["cameras"][i];
    BundleCamera bc;
    bc.camera = detail::camera_from_json(jc, i);
    if (!jc.contains("image") || !jc["image"].is_string())
      throw ParseError("bundle: cameras[" + std::to_string(i) + "] is missing field 'image'");
    bc.image = jc["image"].get<std::string>();
    if (jc.contains("split")) {
      const auto s = jc["split"].get<std::string>();
      if (s == "train") bc.split = Split::Train;
      else if (s == "test") bc.split = Split::Test;
      else throw ParseError("bundle: cameras[" + std::to_string(i) + "].split must be train or test");
    }
    b.cameras.push_back(std::move(bc));
  }
  if (doc.contains("background")) {
    const auto bg = doc["background"].get<std::vector<double>>();
    if (bg.size() != 3) throw ParseError("bundle: background must have 3 entries");
    b.background = Vec3d(bg[0], bg[1], bg[2]);
  }
  if (doc.contains("points")) {
    b.points_file = doc["points"].get<std::string>();
    if (load_points)
      for (const auto& p : read_ply_file((root / b.points_file).string())) b.points.push_back(to_colored(p));
  }
  return b;
}

inline SceneBundle load_scene_bundle(const std::string& path, bool load_points = true) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) p /= "scene.json";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open scene bundle " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bundle(ss.str(), p.parent_path(), load_points);
}

/// Reads the images of every camera in the given split.
inline std::vector<View> load_views(const SceneBundle& b, Split split) {
  std::vector<View> views;
  for (const auto& bc : b.cameras) {
    if (bc.split != split) continue;
    const auto file = (b.root / bc.image).string();
    ImageD img = read_png(file);
    if (img.width() != bc.camera.width || img.height() != bc.camera.height)
      throw ParseError("bundle: image " + file + " is " + std::to_string(img.width()) + "x" +
                       std::to_string(img.height()) + " but its camera is " + std::to_string(bc.camera.width) + "x" +
                       std::to_string(bc.camera.height));
    views.push_back({bc.camera, std::move(img), bc.image});
  }
  return views;
}

inline std::vector<Camera> bundle_cameras(const SceneBundle& b) {
  std::vector<Camera> cams;
  for (const auto& c : b.cameras) cams.push_back(c.camera);
  return cams;
}

inline void write_bundle_json(const std::filesystem::path& file, const SceneBundle& b) {
  nlohmann::json doc;
  doc["cameras"] = nlohmann::json::array();
  for (const auto& bc : b.cameras) {
    auto j = camera_to_json(bc.camera);
    j["image"] = bc.image;
    j["split"] = bc.split == Split::Train ? "train" : "test";
    doc["cameras"].push_back(j);
  }
  if (!b.points_file.empty()) doc["points"] = b.points_file;
  doc["background"] = {b.background.x(), b.background.y(), b.background.z()};
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump(2) << "\n";
}

}  // namespace cvxsplat::io
