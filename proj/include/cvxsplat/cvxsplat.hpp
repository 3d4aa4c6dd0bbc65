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

// Umbrella header.

#include "cvxsplat/backward.hpp"
#include "cvxsplat/config.hpp"
#include "cvxsplat/density.hpp"
#include "cvxsplat/field.hpp"
#include "cvxsplat/fit2d.hpp"
#include "cvxsplat/gradcheck.hpp"
#include "cvxsplat/hull.hpp"
#include "cvxsplat/image.hpp"
#include "cvxsplat/init.hpp"
#include "cvxsplat/io/bundle.hpp"
#include "cvxsplat/io/checkpoint.hpp"
#include "cvxsplat/io/half.hpp"
#include "cvxsplat/io/metrics_csv.hpp"
#include "cvxsplat/io/ply.hpp"
#include "cvxsplat/io/png.hpp"
#include "cvxsplat/loss.hpp"
#include "cvxsplat/math.hpp"
#include "cvxsplat/metrics.hpp"
#include "cvxsplat/optimizer.hpp"
#include "cvxsplat/rasterizer.hpp"
#include "cvxsplat/scene.hpp"
#include "cvxsplat/sh.hpp"
#include "cvxsplat/synth.hpp"
#include "cvxsplat/trainer.hpp"
