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

// Renders the preset five-primitive scene from a ring of cameras.
//
//   render_turntable [out_dir] [frames]

#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "cvxsplat/io/png.hpp"
#include "cvxsplat/synth.hpp"

int main(int argc, char** argv) {
  using namespace cvxsplat;
  const std::string out = argc > 1 ? argv[1] : ".";
  const int frames = argc > 2 ? std::stoi(argv[2]) : 12;

  const Scene<double> scene = preset_scene();
  RingOptions ring;
  ring.count = frames;
  ring.width = ring.height_px = 128;
  RenderOptions opts;
  opts.mode = ScalingMode::Depth;

  int i = 0;
  for (const auto& cam : ring_cameras(ring)) {
    std::ostringstream name;
    name << out << "/frame_" << std::setw(3) << std::setfill('0') << i++ << ".png";
    io::write_png(name.str(), render(scene, cam, opts).image);
    std::cout << name.str() << "\n";
  }
  return 0;
}
