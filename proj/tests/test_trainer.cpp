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

#include "cvxsplat/synth.hpp"
#include "cvxsplat/trainer.hpp"

using namespace cvxsplat;

namespace {

SynthData small_synth(int views = 4) {
  SynthOptions o;
  o.train_views = views;
  o.test_views = 2;
  o.size = 32;
  return make_synth(o);
}

TrainConfig quick_config(int iterations) {
  TrainConfig cfg;
  cfg.total_iterations = iterations;
  cfg.densify_start = iterations + 1;
  cfg.eval_interval = 0;
  return cfg;
}

}  // namespace

TEST(PositionLr, ExponentialSchedule) {
  TrainConfig cfg;
  cfg.total_iterations = 30000;
  EXPECT_NEAR(position_lr(0, cfg), 5e-4, 1e-18);
  EXPECT_NEAR(position_lr(15000, cfg), 5e-5, 1e-17);
  EXPECT_NEAR(position_lr(30000, cfg), 5e-6, 1e-18);
  EXPECT_NEAR(position_lr(60000, cfg), 5e-6, 1e-18);
  cfg.total_iterations = 0;
  EXPECT_EQ(position_lr(10, cfg), 5e-4);
}

TEST(RenderOptionsFromConfig, UsesHardGate) {
  TrainConfig cfg;
  cfg.scaling_mode = ScalingMode::SqrtDepth;
  cfg.alpha_cutoff = 0.01;
  const auto o = render_options(cfg);
  EXPECT_EQ(o.mask_gate, MaskGate::Hard);
  EXPECT_EQ(o.mode, ScalingMode::SqrtDepth);
  EXPECT_EQ(o.alpha_cutoff, 0.01);
}

TEST(Train, ConvergedStartStaysConverged) {
  auto data = small_synth();
  Scene<double> scene = data.truth;
  TrainConfig cfg = quick_config(40);
  // Targets equal the current render, so only the mask term has a gradient.
  for (auto& v : data.train) v.target = render(scene, v.camera, render_options(cfg)).image;
  const auto res = train(scene, data.train, cfg);
  ASSERT_EQ(res.log.size(), 40u);
  EXPECT_NEAR(res.log.front().loss, cfg.beta_mask * res.log.front().mask, 1e-12);
  EXPECT_EQ(res.log.front().l1, 0.0);
  EXPECT_GT(mean_psnr(scene, data.train, render_options(cfg)), 45.0);
}

TEST(Train, SingleViewConverges) {
  auto data = small_synth(1);
  Scene<double> scene = perturb_scene(data.truth, 0.02 * data.truth.scene_extent, 3);
  TrainConfig cfg = quick_config(400);
  const auto res = train(scene, data.train, cfg);
  EXPECT_LT(res.log.back().l1, 1e-2);
  EXPECT_LT(res.log.back().loss, res.log.front().loss);
}

TEST(Train, DensifyDisabledKeepsCount) {
  auto data = small_synth();
  Scene<double> scene = perturb_scene(data.truth, 0.05, 1);
  const auto res = train(scene, data.train, quick_config(50));
  for (const auto& e : res.log) EXPECT_EQ(e.primitive_count, 5u);
}

TEST(Train, DensifyCallbackSchedule) {
  auto data = small_synth();
  Scene<double> scene = perturb_scene(data.truth, 0.05, 1);
  TrainConfig cfg = quick_config(30);
  cfg.densify_start = 10;
  cfg.densify_interval = 10;
  cfg.densify_stop = 20;
  std::vector<int> at;
  TrainCallbacks cb;
  cb.on_densify = [&](const DensifyReport& rep, int it) {
    at.push_back(it);
    EXPECT_EQ(rep.after, rep.source.size());
    if (it > cfg.densify_stop) {
      EXPECT_EQ(rep.split, 0);
    }
  };
  train(scene, data.train, cfg, cb);
  EXPECT_EQ(at, (std::vector<int>{10, 20, 30}));
}

TEST(Train, Reproducible) {
  auto data = small_synth();
  Scene<double> a = perturb_scene(data.truth, 0.05, 2), b = a;
  TrainConfig cfg = quick_config(30);
  cfg.seed = 9;
  const auto ra = train(a, data.train, cfg), rb = train(b, data.train, cfg);
  ASSERT_EQ(ra.log.size(), rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) EXPECT_EQ(ra.log[i].loss, rb.log[i].loss);
  EXPECT_EQ(a.primitives[0].points, b.primitives[0].points);
}

TEST(Train, EvaluatesAtIntervalAndEnd) {
  auto data = small_synth();
  Scene<double> scene = data.truth;
  TrainConfig cfg = quick_config(25);
  cfg.eval_interval = 10;
  const auto res = train(scene, data.train, cfg, {}, data.test);
  for (const auto& e : res.log) {
    const bool expect = e.iteration % 10 == 0 || e.iteration == 25;
    EXPECT_EQ(e.psnr.has_value(), expect) << e.iteration;
    EXPECT_EQ(e.test_psnr.has_value(), expect);
  }
}

TEST(Train, ZeroIterationsIsNoOp) {
  auto data = small_synth();
  Scene<double> scene = data.truth;
  const auto res = train(scene, data.train, quick_config(0));
  EXPECT_TRUE(res.log.empty());
  EXPECT_EQ(scene.primitives[0].points, data.truth.primitives[0].points);
}

TEST(Train, RejectsBadInput) {
  auto data = small_synth();
  Scene<double> scene = data.truth;
  EXPECT_THROW(train(scene, {}, quick_config(1)), std::invalid_argument);
  auto views = data.train;
  views[0].target = ImageD(8, 8, 3);
  EXPECT_THROW(train(scene, views, quick_config(1)), std::invalid_argument);
  Scene<double> empty;
  EXPECT_THROW(train(empty, data.train, quick_config(1)), std::invalid_argument);
  TrainConfig bad = quick_config(1);
  bad.lr_sh = 0;
  EXPECT_THROW(train(scene, data.train, bad), std::invalid_argument);
}

TEST(Train, NonFiniteParametersReportFailure) {
  auto data = small_synth();
  Scene<double> scene = data.truth;
  scene.primitives[0].raw_mask = std::nan("");
  bool called = false;
  TrainCallbacks cb;
  cb.on_failure = [&](const Scene<double>&, int it) {
    called = true;
    EXPECT_EQ(it, 0);
  };
  EXPECT_THROW(train(scene, data.train, quick_config(5), cb), TrainingError);
  EXPECT_TRUE(called);
}
