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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cvxsplat/gradcheck.hpp"
#include "cvxsplat/io/bundle.hpp"
#include "cvxsplat/io/checkpoint.hpp"
#include "cvxsplat/io/half.hpp"
#include "cvxsplat/io/ply.hpp"
#include "cvxsplat/io/png.hpp"
#include "cvxsplat/synth.hpp"

using namespace cvxsplat;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cvxsplat_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

template <typename F> std::string error_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

// ---- PLY ----

TEST(Ply, AsciiWithExtraProperties) {
  std::istringstream in(
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float x\nproperty float y\n"
      "property float z\nproperty float nx\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "1 2 3 0 255 128 0\n-1.5 0 0.25 1 10 20 30\n3 0 1 1\n");
  const auto pts = io::read_ply(in);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].position, Vec3d(1, 2, 3));
  EXPECT_EQ(pts[0].rgb, (std::array<std::uint8_t, 3>{255, 128, 0}));
  EXPECT_EQ(pts[1].position, Vec3d(-1.5, 0, 0.25));
}

TEST(Ply, BinaryRoundTrip) {
  std::vector<io::PlyPoint> pts = {{{0.5, -2, 3.25}, {1, 2, 3}}, {{1e3, 0, -1}, {250, 0, 77}}};
  for (bool binary : {true, false}) {
    std::stringstream ss;
    io::write_ply(ss, pts, binary);
    const auto back = io::read_ply(ss);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(back[i].position, pts[i].position);
      EXPECT_EQ(back[i].rgb, pts[i].rgb);
    }
  }
}

TEST(Ply, BigEndianDoubles) {
  std::string body = "ply\nformat binary_big_endian 1.0\nelement vertex 1\nproperty double x\nproperty double y\n"
                     "property double z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  auto be = [&](double v) {
    unsigned char b[8];
    std::memcpy(b, &v, 8);
    for (int i = 7; i >= 0; --i) body.push_back(char(b[i]));
  };
  be(1.25);
  be(-2);
  be(1e-3);
  body += std::string("\x01\x02\x03", 3);
  std::istringstream in(body);
  const auto pts = io::read_ply(in);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].position, Vec3d(1.25, -2, 1e-3));
  EXPECT_EQ(pts[0].rgb[2], 3);
}

TEST(Ply, MissingColourProperty) {
  std::istringstream in("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                        "property float z\nproperty uchar green\nproperty uchar blue\nend_header\n0 0 0 1 1\n");
  EXPECT_NE(error_of([&] { io::read_ply(in, "cloud.ply"); }).find("missing property 'red'"), std::string::npos);
}

TEST(Ply, HeaderErrorsCarryLocation) {
  std::istringstream in("ply\nformat ascii 1.0\nelement vertex 1\nproperty quaternion x\nend_header\n");
  const auto msg = error_of([&] { io::read_ply(in, "cloud.ply"); });
  EXPECT_NE(msg.find("cloud.ply:4"), std::string::npos) << msg;
  std::istringstream bad("plx\n");
  EXPECT_THROW(io::read_ply(bad), io::ParseError);
}

TEST(Ply, TruncatedBinary) {
  std::stringstream ss;
  io::write_ply(ss, {{{1, 2, 3}, {4, 5, 6}}, {{7, 8, 9}, {1, 1, 1}}}, true);
  std::string s = ss.str();
  s.resize(s.size() - 5);
  std::istringstream in(s);
  EXPECT_THROW(io::read_ply(in), io::ParseError);
}

TEST(Ply, FloatColoursScaled) {
  std::istringstream in("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                        "property float z\nproperty float red\nproperty float green\nproperty float blue\n"
                        "end_header\n0 0 0 1 0.5 0\n");
  const auto pts = io::read_ply(in);
  EXPECT_EQ(pts[0].rgb, (std::array<std::uint8_t, 3>{255, 128, 0}));
}

// ---- colour conversion and PNG ----

TEST(Srgb, RoundTripAndAnchors) {
  EXPECT_EQ(io::srgb_to_linear(0.0), 0.0);
  EXPECT_NEAR(io::srgb_to_linear(1.0), 1.0, 1e-15);
  EXPECT_NEAR(io::srgb_to_linear(0.5), 0.21404114048223255, 1e-12);
  for (int b = 0; b < 256; ++b) EXPECT_EQ(io::linear_to_byte(io::byte_to_linear(std::uint8_t(b))), b);
}

TEST(Png, WriteReadQuantised) {
  const auto dir = scratch_dir("png");
  ImageD img(7, 5, 3);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x)
      for (int c = 0; c < 3; ++c) img(x, y, c) = (x + 7 * y + c) / 40.0;
  io::write_png((dir / "a.png").string(), img);
  const auto back = io::read_png((dir / "a.png").string());
  ASSERT_EQ(back.width(), 7);
  ASSERT_EQ(back.height(), 5);
  const auto q = io::quantize_srgb8(img);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_DOUBLE_EQ(back.values()[i], q.values()[i]);
  EXPECT_THROW(io::read_png((dir / "missing.png").string()), std::runtime_error);
}

// ---- half precision ----

TEST(Half, ExactValuesAndSpecials) {
  for (float f : {0.0f, 1.0f, -2.0f, 0.5f, 65504.0f, 6.103515625e-05f, 5.960464477539063e-08f})
    EXPECT_EQ(io::half_to_float(io::float_to_half(f)), f);
  EXPECT_EQ(io::float_to_half(1.0f), 0x3c00);
  EXPECT_EQ(io::float_to_half(-2.0f), 0xc000);
  EXPECT_TRUE(std::isinf(io::half_to_float(io::float_to_half(1e6f))));
  EXPECT_TRUE(std::isnan(io::half_to_float(io::float_to_half(std::numeric_limits<float>::quiet_NaN()))));
  EXPECT_EQ(std::signbit(io::half_to_float(io::float_to_half(-0.0f))), true);
}

TEST(Half, RoundToNearestEven) {
  // 1 + 2^-11 lies halfway between 1 and the next half; ties go to even (1).
  EXPECT_EQ(io::float_to_half(1.0f + std::ldexp(1.0f, -11)), 0x3c00);
  EXPECT_EQ(io::float_to_half(1.0f + 3 * std::ldexp(1.0f, -11)), 0x3c02);
  for (float f = -10; f < 10; f += 0.0137f) {
    const float h = io::half_to_float(io::float_to_half(f));
    EXPECT_LE(std::abs(h - f), std::abs(f) * std::ldexp(1.0f, -11) + 1e-7f);
  }
}

// ---- checkpoint ----

TEST(Checkpoint, Float32BitIdentical) {
  auto s = convert<double>(convert<float>(random_scene(3).scene));
  s.scene_extent = 2.5;
  // Through a volatile: GCC 11 at -O3 folds an in-place double(float(x)) loop.
  for (int a = 0; a < 3; ++a) {
    volatile float f = float(s.background[a]);
    s.background[a] = f;
  }
  const auto back = io::round_trip(s, io::Precision::Float32);
  ASSERT_EQ(back.size(), s.size());
  EXPECT_EQ(back.sh_degree, s.sh_degree);
  EXPECT_EQ(back.scene_extent, 2.5);
  EXPECT_EQ(back.background, s.background);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto &a = s.primitives[i], &b = back.primitives[i];
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.raw_delta, b.raw_delta);
    EXPECT_EQ(a.raw_sigma, b.raw_sigma);
    EXPECT_EQ(a.raw_opacity, b.raw_opacity);
    EXPECT_EQ(a.raw_mask, b.raw_mask);
    EXPECT_EQ(a.sh, b.sh);
  }
}

TEST(Checkpoint, Float16RenderWithinTwoLevels) {
  const auto rs = random_scene(4, {.primitives = 10, .k = 6, .width = 48, .height = 48});
  const auto s32 = io::round_trip(rs.scene, io::Precision::Float32);
  const auto s16 = io::round_trip(rs.scene, io::Precision::Float16);
  const auto a = render(s32, rs.camera).image, b = render(s16, rs.camera).image;
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  EXPECT_LE(worst, 2.0 / 255);
}

TEST(Checkpoint, HeaderLayout) {
  Scene<double> s = preset_scene();
  std::stringstream ss;
  io::save_checkpoint(ss, s, io::Precision::Float16);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "3DCS");
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(bytes[off + i])) << (8 * i);
    return v;
  };
  EXPECT_EQ(u32(4), 1u);   // version
  EXPECT_EQ(u32(8), 6u);   // K
  EXPECT_EQ(u32(12), 1u);  // SH degree
  EXPECT_EQ(u32(16), 5u);  // count (low word)
  EXPECT_EQ(u32(24), 16u);
  const std::size_t header = 4 + 4 * 3 + 8 + 4 + 4 + 12;
  const std::size_t per = (3 * 6 + 4 + 3 * 4) * 2;
  EXPECT_EQ(bytes.size(), header + 5 * per);
}

TEST(Checkpoint, VersionMismatchIsNamed) {
  std::stringstream ss;
  io::save_checkpoint(ss, preset_scene(), io::Precision::Float32);
  std::string bytes = ss.str();
  bytes[4] = 2;
  std::istringstream in(bytes);
  EXPECT_NE(error_of([&] { io::load_checkpoint(in); }).find("unsupported format version 2 (expected 1)"),
            std::string::npos);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  std::stringstream ss;
  io::save_checkpoint(ss, preset_scene(), io::Precision::Float32);
  const std::string bytes = ss.str();
  std::istringstream magic("XXXX" + bytes.substr(4));
  EXPECT_THROW(io::load_checkpoint(magic), io::CheckpointError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(io::load_checkpoint(truncated), io::CheckpointError);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(io::load_checkpoint(trailing), io::CheckpointError);
  EXPECT_THROW(io::load_checkpoint_file("/nonexistent/x.3dcs"), io::CheckpointError);
  EXPECT_THROW(io::parse_precision(8), std::invalid_argument);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = scratch_dir("ckpt");
  const auto s = convert<double>(convert<float>(preset_scene()));
  io::save_checkpoint_file((dir / "a.3dcs").string(), s, io::Precision::Float32);
  const auto back = io::load_checkpoint_file((dir / "a.3dcs").string());
  EXPECT_EQ(back.primitives[2].points, s.primitives[2].points);
}

// ---- scene bundle ----

TEST(Bundle, ParseCameras) {
  const Camera c = look_at(Vec3d(0, 0, -3), Vec3d::Zero(), Vec3d(0, -1, 0), 50, 51, 16, 12);
  nlohmann::json doc;
  auto jc = io::camera_to_json(c);
  jc["image"] = "images/a.png";
  jc["split"] = "test";
  doc["cameras"] = {jc};
  doc["background"] = {0.1, 0.2, 0.3};
  const auto b = io::parse_bundle(doc.dump(), "/tmp");
  ASSERT_EQ(b.cameras.size(), 1u);
  EXPECT_EQ(b.cameras[0].split, io::Split::Test);
  EXPECT_EQ(b.cameras[0].camera.fy, 51);
  EXPECT_LT((b.cameras[0].camera.R - c.R).norm(), 1e-15);
  EXPECT_EQ(b.background, Vec3d(0.1, 0.2, 0.3));
  EXPECT_TRUE(b.points.empty());
}

TEST(Bundle, ErrorsNameTheProblem) {
  auto msg = error_of([] { io::parse_bundle("{\n  \"cameras\": [\n    {,}\n  ]\n}", "."); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  msg = error_of([] { io::parse_bundle(R"({"cameras": [{"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 4}]})", "."); });
  EXPECT_NE(msg.find("cameras[0] is missing field 'height'"), std::string::npos) << msg;
  msg = error_of([] { io::parse_bundle(R"({"images": []})", "."); });
  EXPECT_NE(msg.find("'cameras'"), std::string::npos) << msg;
  msg = error_of([] {
    io::parse_bundle(R"({"cameras": [{"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 4, "height": 4,
      "R": [1,0,0,0,1,0,0,0,1], "t": [0,0,0], "image": "a.png", "split": "val"}]})", ".");
  });
  EXPECT_NE(msg.find("split"), std::string::npos) << msg;
}

TEST(Bundle, WriteLoadAndImageSizeCheck) {
  const auto dir = scratch_dir("bundle");
  fs::create_directories(dir / "images");
  io::SceneBundle b;
  const Camera c = look_at(Vec3d(0, 0, -3), Vec3d::Zero(), Vec3d(0, -1, 0), 20, 20, 8, 6);
  b.cameras.push_back({c, "images/a.png", io::Split::Train});
  b.cameras.push_back({c, "images/b.png", io::Split::Test});
  b.points_file = "points.ply";
  b.background = Vec3d(0, 0.5, 1);
  io::write_ply_file((dir / "points.ply").string(),
                     {{{0, 0, 0}, {255, 0, 0}}, {{1, 0, 0}, {0, 255, 0}}, {{0, 1, 0}, {0, 0, 255}}, {{0, 0, 1}, {9, 9, 9}}});
  io::write_png((dir / "images/a.png").string(), ImageD(8, 6, 3, 0.25));
  io::write_png((dir / "images/b.png").string(), ImageD(9, 6, 3, 0.25));
  io::write_bundle_json(dir / "scene.json", b);

  const auto back = io::load_scene_bundle(dir.string());
  ASSERT_EQ(back.points.size(), 4u);
  EXPECT_NEAR(back.points[0].color.x(), 1.0, 1e-12);
  EXPECT_EQ(back.background, b.background);
  const auto train = io::load_views(back, io::Split::Train);
  ASSERT_EQ(train.size(), 1u);
  EXPECT_EQ(train[0].target.width(), 8);
  const auto msg = error_of([&] { io::load_views(back, io::Split::Test); });
  EXPECT_NE(msg.find("9x6 but its camera is 8x6"), std::string::npos) << msg;
  EXPECT_THROW(io::load_scene_bundle((dir / "nope").string()), std::runtime_error);
}
