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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "cvxsplat/field.hpp"

namespace cvxsplat {

/// Training hyperparameters. Field names double as config-file keys.
struct TrainConfig {
  double lambda_dssim = 0.2;
  double beta_mask = 0.0005;
  double lr_sigma = 0.0045;
  double lr_delta = 0.005;
  double lr_position_init = 5e-4;
  double lr_position_final = 5e-6;
  double lr_mask = 0.01;
  double lr_opacity = 0.05;
  double lr_sh = 0.0025;
  // Position learning rates are in units of the scene extent.
  bool scale_position_lr_by_extent = true;
  int total_iterations = 30000;
  int densify_start = 500;
  int densify_interval = 200;
  int densify_stop = 9000;
  double sigma_loss_threshold = 4e-6;
  double prune_opacity = 0.03;
  double prune_size_fraction = 0.3;
  double split_scale = 0.7;
  double sigma_boost = 1.25;
  double opacity_factor = 0.8;
  double mask_threshold = 0.01;
  ScalingMode scaling_mode = ScalingMode::Depth;
  double alpha_cutoff = 1.0 / 255.0;
  double transmittance_floor = 1e-4;
  int eval_interval = 500;
  std::uint64_t seed = 0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0)) throw std::invalid_argument(std::string("config: ") + name + " must be positive");
    };
    positive(lr_sigma, "lr_sigma");
    positive(lr_delta, "lr_delta");
    positive(lr_position_init, "lr_position_init");
    positive(lr_position_final, "lr_position_final");
    positive(lr_mask, "lr_mask");
    positive(lr_opacity, "lr_opacity");
    positive(lr_sh, "lr_sh");
    if (lr_position_final > lr_position_init)
      throw std::invalid_argument("config: lr_position_final must not exceed lr_position_init");
    if (!(lambda_dssim > 0 && lambda_dssim < 1)) throw std::invalid_argument("config: lambda_dssim must be in (0, 1)");
    if (total_iterations < 0) throw std::invalid_argument("config: total_iterations must be >= 0");
    if (densify_interval < 1) throw std::invalid_argument("config: densify_interval must be >= 1");
    if (!(split_scale > 0 && split_scale <= 1)) throw std::invalid_argument("config: split_scale must be in (0, 1]");
    if (sigma_boost < 1) throw std::invalid_argument("config: sigma_boost must be >= 1");
    if (!(opacity_factor > 0 && opacity_factor <= 1))
      throw std::invalid_argument("config: opacity_factor must be in (0, 1]");
  }
};

/// Reflection table over TrainConfig for config files and command-line flags.
struct ConfigField {
  using Member = std::variant<double TrainConfig::*, int TrainConfig::*, bool TrainConfig::*,
                              std::uint64_t TrainConfig::*, ScalingMode TrainConfig::*>;
  const char* name;
  Member member;
  const char* help;
};

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      {"lambda_dssim", &TrainConfig::lambda_dssim, "weight of the D-SSIM term"},
      {"beta_mask", &TrainConfig::beta_mask, "weight of the mask sparsity loss"},
      {"lr_sigma", &TrainConfig::lr_sigma, "learning rate of raw sharpness"},
      {"lr_delta", &TrainConfig::lr_delta, "learning rate of raw smoothness"},
      {"lr_position_init", &TrainConfig::lr_position_init, "initial point learning rate"},
      {"lr_position_final", &TrainConfig::lr_position_final, "final point learning rate"},
      {"lr_mask", &TrainConfig::lr_mask, "learning rate of the mask"},
      {"lr_opacity", &TrainConfig::lr_opacity, "learning rate of raw opacity"},
      {"lr_sh", &TrainConfig::lr_sh, "learning rate of SH coefficients"},
      {"scale_position_lr_by_extent", &TrainConfig::scale_position_lr_by_extent,
       "multiply point learning rates by the scene extent"},
      {"total_iterations", &TrainConfig::total_iterations, "number of training iterations"},
      {"densify_start", &TrainConfig::densify_start, "first densification iteration"},
      {"densify_interval", &TrainConfig::densify_interval, "iterations between densify/prune rounds"},
      {"densify_stop", &TrainConfig::densify_stop, "last iteration that may split"},
      {"sigma_loss_threshold", &TrainConfig::sigma_loss_threshold, "split when the mean |dL/draw_sigma| exceeds this"},
      {"prune_opacity", &TrainConfig::prune_opacity, "prune below this opacity"},
      {"prune_size_fraction", &TrainConfig::prune_size_fraction, "prune diameters above this fraction of the extent"},
      {"split_scale", &TrainConfig::split_scale, "child scale factor on split"},
      {"sigma_boost", &TrainConfig::sigma_boost, "child sharpness multiplier on split"},
      {"opacity_factor", &TrainConfig::opacity_factor, "child opacity multiplier on split"},
      {"mask_threshold", &TrainConfig::mask_threshold, "hard mask gate threshold"},
      {"scaling_mode", &TrainConfig::scaling_mode, "perspective scaling: none|sqrt|depth|depth2"},
      {"alpha_cutoff", &TrainConfig::alpha_cutoff, "skip contributions below this alpha"},
      {"transmittance_floor", &TrainConfig::transmittance_floor, "stop blending below this transmittance"},
      {"eval_interval", &TrainConfig::eval_interval, "iterations between PSNR evaluations"},
      {"seed", &TrainConfig::seed, "random seed"},
  };
  return fields;
}

inline const ConfigField* find_config_field(const std::string& name) {
  for (const auto& f : config_fields())
    if (name == f.name) return &f;
  return nullptr;
}

inline void set_config_value(TrainConfig& cfg, const ConfigField& f, const std::string& value) {
  std::visit(
      [&](auto member) {
        using M = std::remove_cvref_t<decltype(cfg.*member)>;
        try {
          if constexpr (std::is_same_v<M, double>) {
            cfg.*member = std::stod(value);
          } else if constexpr (std::is_same_v<M, int>) {
            cfg.*member = std::stoi(value);
          } else if constexpr (std::is_same_v<M, std::uint64_t>) {
            cfg.*member = std::stoull(value);
          } else if constexpr (std::is_same_v<M, bool>) {
            if (value == "true" || value == "1") cfg.*member = true;
            else if (value == "false" || value == "0") cfg.*member = false;
            else throw std::invalid_argument("expected true|false");
          } else {
            cfg.*member = parse_scaling_mode(value);
          }
        } catch (const std::exception& e) {
          throw std::invalid_argument(std::string("config: bad value '") + value + "' for " + f.name + ": " + e.what());
        }
      },
      f.member);
}

inline std::string get_config_value(const TrainConfig& cfg, const ConfigField& f) {
  return std::visit(
      [&](auto member) -> std::string {
        using M = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<M, bool>) return cfg.*member ? "true" : "false";
        else if constexpr (std::is_same_v<M, ScalingMode>) return to_string(cfg.*member);
        else {
          std::ostringstream os;
          os.precision(17);
          os << cfg.*member;
          return os.str();
        }
      },
      f.member);
}

/// Parses `key = value` lines; '#' starts a comment. Unknown keys are errors.
inline void apply_config_text(TrainConfig& cfg, std::istream& in, const std::string& source = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const ConfigField* f = find_config_field(key);
    if (!f) throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    set_config_value(cfg, *f, value);
  }
}

inline void load_config_file(TrainConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  apply_config_text(cfg, in, path);
}

inline std::string dump_config(const TrainConfig& cfg) {
  std::ostringstream os;
  for (const auto& f : config_fields()) os << f.name << " = " << get_config_value(cfg, f) << "\n";
  return os.str();
}

}  // namespace cvxsplat
