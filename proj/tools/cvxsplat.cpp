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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvxsplat/cvxsplat.hpp"

namespace fs = std::filesystem;
using namespace cvxsplat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitTolerance = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string flag_name(const std::string& field) {
  std::string s = field;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

/// One string option per TrainConfig field; applied after the config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "key = value file with TrainConfig fields")->check(CLI::ExistingFile);
    for (const auto& f : config_fields()) {
      if (std::string(f.name) == "seed") continue;  // handled by the shared --seed flag
      app->add_option_function<std::string>(
             flag_name(f.name), [this, name = std::string(f.name)](const std::string& v) { values[name] = v; }, f.help)
          ->group("Training configuration");
    }
  }

  // Bad keys or values are usage errors.
  TrainConfig build() const {
    TrainConfig cfg;
    try {
      if (!config_file.empty()) load_config_file(cfg, config_file);
      for (const auto& [name, v] : values) set_config_value(cfg, *find_config_field(name), v);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

std::string zero_pad(int v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory " + p.string() + ": " + ec.message());
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string scene, out, init;
  std::optional<int> iterations;
  int k = 6;
  int sh_degree = 3;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int precision = 32;
  int preview_view = 0;
  ConfigFlags flags;
};

int cmd_train(const TrainArgs& a) {
  if (a.scene.empty()) throw UsageError("train: --scene is required");
  if (a.out.empty()) throw UsageError("train: --out is required");
  TrainConfig cfg = a.flags.build();
  if (a.iterations) cfg.total_iterations = *a.iterations;
  if (a.seed_set) cfg.seed = a.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto precision = io::parse_precision(a.precision);

  const auto bundle = io::load_scene_bundle(a.scene, a.init.empty());
  const auto train_views = io::load_views(bundle, io::Split::Train);
  const auto test_views = io::load_views(bundle, io::Split::Test);
  if (train_views.empty()) throw std::runtime_error("train: bundle has no training views");

  Scene<double> scene;
  if (!a.init.empty()) {
    scene = io::load_checkpoint_file<double>(a.init);
  } else {
    scene = init_scene<double>(bundle.points, a.k, a.sh_degree);
    scene.background = bundle.background;
    scene.scene_extent = scene_extent_from_cameras(io::bundle_cameras(bundle));
  }

  const fs::path out(a.out);
  ensure_dir(out / "previews");
  {
    std::ofstream c(out / "config.txt");
    c << dump_config(cfg);
  }
  io::save_checkpoint_file((out / "initial.3dcs").string(), scene, precision);
  std::cout << "scene: " << scene.size() << " primitives, K=" << scene.k() << ", " << train_views.size()
            << " train / " << test_views.size() << " test views, extent " << scene.scene_extent << "\n";

  io::MetricsCsv csv((out / "metrics.csv").string());
  const auto opts = render_options(cfg);
  const View& preview = train_views[std::min<std::size_t>(a.preview_view, train_views.size() - 1)];
  TrainCallbacks cb;
  cb.on_iteration = [&](const IterationLog& e, const Scene<double>& s) {
    csv.append(e);
    if (e.psnr) {
      io::write_png((out / "previews" / ("iter_" + zero_pad(e.iteration, 6) + ".png")).string(),
                    render(s, preview.camera, opts).image);
      std::cout << "iter " << e.iteration << "  loss " << e.loss << "  psnr " << *e.psnr;
      if (e.test_psnr) std::cout << "  test " << *e.test_psnr;
      std::cout << "  primitives " << e.primitive_count << "\n";
    }
  };
  cb.on_densify = [&](const DensifyReport& r, int it) {
    std::cout << "densify @" << it << ": split " << r.split << ", pruned " << r.pruned_opacity << "/" << r.pruned_size
              << "/" << r.pruned_mask << " (opacity/size/mask), " << r.before << " -> " << r.after << "\n";
  };
  cb.on_failure = [&](const Scene<double>& s, int it) {
    const auto p = out / "failure.3dcs";
    io::save_checkpoint_file(p.string(), s, io::Precision::Float32);
    std::cerr << "state before failing iteration " << it << " saved to " << p << "\n";
  };

  const auto result = train(scene, train_views, cfg, cb, test_views);
  io::save_checkpoint_file((out / "final.3dcs").string(), scene, precision);

  const double tr = mean_psnr(scene, train_views, opts);
  std::ofstream ev(out / "final_eval.csv");
  ev << "split,psnr,ssim\n";
  auto mean_ssim = [&](const std::vector<View>& vs) {
    double s = 0;
    for (const auto& v : vs) s += ssim(render(scene, v.camera, opts).image, v.target);
    return vs.empty() ? 0.0 : s / double(vs.size());
  };
  ev << "train," << tr << "," << mean_ssim(train_views) << "\n";
  std::cout << "final: loss " << result.final_loss << "  train psnr " << tr;
  if (!test_views.empty()) {
    const double te = mean_psnr(scene, test_views, opts);
    ev << "test," << te << "," << mean_ssim(test_views) << "\n";
    std::cout << "  test psnr " << te;
  }
  std::cout << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string checkpoint, cameras, out, split = "all";
  bool compare = false, overlay = false;
  ConfigFlags flags;
};

int cmd_render(const RenderArgs& a) {
  if (a.checkpoint.empty() || a.cameras.empty() || a.out.empty())
    throw UsageError("render: --checkpoint, --cameras and --out are required");
  const TrainConfig cfg = a.flags.build();
  const auto opts = render_options(cfg);
  const auto scene = io::load_checkpoint_file<double>(a.checkpoint);
  const auto bundle = io::load_scene_bundle(a.cameras, false);
  ensure_dir(a.out);
  double psnr_sum = 0;
  int compared = 0, written = 0;
  for (std::size_t i = 0; i < bundle.cameras.size(); ++i) {
    const auto& bc = bundle.cameras[i];
    if (a.split == "train" && bc.split != io::Split::Train) continue;
    if (a.split == "test" && bc.split != io::Split::Test) continue;
    const ImageD img = a.overlay ? hull_overlay(scene, bc.camera, opts) : render(scene, bc.camera, opts).image;
    const std::string name = bc.image.empty() ? "view_" + zero_pad(int(i), 3) + ".png"
                                              : fs::path(bc.image).filename().replace_extension(".png").string();
    io::write_png((fs::path(a.out) / name).string(), img);
    ++written;
    if (a.compare) {
      const ImageD target = io::read_png((bundle.root / bc.image).string());
      const double p = psnr(img, target);
      std::cout << name << "  psnr " << std::fixed << std::setprecision(4) << p << "\n";
      psnr_sum += p;
      ++compared;
    }
  }
  std::cout << "rendered " << written << " view(s)\n";
  if (compared) std::cout << "mean psnr " << std::fixed << std::setprecision(4) << psnr_sum / compared << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string renders, targets, csv;
};

int cmd_eval(const EvalArgs& a) {
  if (a.renders.empty() || a.targets.empty()) throw UsageError("eval: --renders and --targets are required");
  const auto r = list_pngs(a.renders), t = list_pngs(a.targets);
  if (r.size() != t.size())
    throw std::runtime_error("eval: " + std::to_string(r.size()) + " renders but " + std::to_string(t.size()) +
                             " targets");
  std::ostringstream csv;
  csv << "image,psnr,ssim\n";
  std::cout << std::left << std::setw(28) << "image" << std::right << std::setw(10) << "PSNR" << std::setw(10)
            << "SSIM" << "\n";
  double ps = 0, ss = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const ImageD x = io::read_png(r[i].string()), y = io::read_png(t[i].string());
    if (!x.same_shape(y)) throw std::runtime_error("eval: " + r[i].string() + " and " + t[i].string() + " differ in size");
    const double p = psnr(x, y), s = ssim(x, y);
    ps += p;
    ss += s;
    std::cout << std::left << std::setw(28) << r[i].filename().string() << std::right << std::fixed
              << std::setprecision(4) << std::setw(10) << p << std::setw(10) << s << "\n";
    csv << r[i].filename().string() << "," << std::setprecision(6) << p << "," << s << "\n";
  }
  if (!r.empty()) {
    std::cout << std::left << std::setw(28) << "mean" << std::right << std::setw(10) << ps / r.size() << std::setw(10)
              << ss / r.size() << "\n";
    csv << "mean," << ps / r.size() << "," << ss / r.size() << "\n";
  }
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw std::runtime_error("cannot write " + a.csv);
    f << csv.str();
  } else {
    std::cout << "\n" << csv.str();
  }
  return kExitOk;
}

// ---------------------------------------------------------------- fit2d

struct Fit2dArgs {
  std::string target = "rectangle", target_image, out;
  int size = 64;
  int primitives = 1, k = 6, iterations = 2000;
  std::uint64_t seed = 0;
  bool overlay = false;
  std::vector<int> milestones;
  double min_psnr = 0;
};

int cmd_fit2d(const Fit2dArgs& a) {
  Target2D kind{};
  try {
    kind = parse_target2d(a.target);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const ImageD target = a.target_image.empty() ? make_target2d(kind, a.size) : io::read_png(a.target_image);
  Fit2dOptions o;
  o.primitives = a.primitives;
  o.k = a.k;
  o.iterations = a.iterations;
  o.seed = a.seed;
  if (!a.milestones.empty()) o.milestones = a.milestones;
  const auto res = fit2d(target, o);
  if (!a.out.empty()) {
    const fs::path out(a.out);
    ensure_dir(out);
    io::write_png((out / "target.png").string(), target);
    const Camera cam = pixel_camera(target.width(), target.height());
    TrainConfig cfg = o.config;
    const auto opts = render_options(cfg);
    for (const auto& s : res.snapshots) {
      io::write_png((out / ("iter_" + zero_pad(s.iteration, 6) + ".png")).string(), s.image);
      if (a.overlay)
        io::write_png((out / ("iter_" + zero_pad(s.iteration, 6) + "_hull.png")).string(),
                      hull_overlay(s.scene, cam, opts));
    }
    io::save_checkpoint_file((out / "final.3dcs").string(), res.scene, io::Precision::Float32);
    io::MetricsCsv csv((out / "metrics.csv").string());
    for (const auto& e : res.log) csv.append(e);
  }
  std::cout << "final L1 " << std::setprecision(6) << res.l1 << "  PSNR " << std::fixed << std::setprecision(3)
            << res.psnr << " dB\n";
  if (a.min_psnr > 0 && res.psnr < a.min_psnr) {
    std::cout << "below --min-psnr " << a.min_psnr << "\n";
    return kExitTolerance;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int scenes = 1, primitives = 6, k = 6, size = 32;
  double tolerance = 1e-4;
  double max_flagged = 0.05;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  FdOptions o;
  o.tolerance = a.tolerance;
  o.max_flagged_fraction = a.max_flagged;
  RandomSceneOptions ro;
  ro.primitives = a.primitives;
  ro.k = a.k;
  ro.width = ro.height = a.size;
  FdReport total;
  for (int i = 0; i < a.scenes; ++i) {
    const auto rs = random_scene(a.seed + std::uint64_t(i), ro);
    const auto rep = fd_check(rs.scene, rs.camera, rs.target, o);
    std::cout << "scene seed " << a.seed + i << ": " << rep.checked << " checked, " << rep.flagged
              << " flagged discrete, max rel error " << std::scientific << std::setprecision(3) << rep.max_rel_error
              << std::defaultfloat << " (" << rep.worst << ")\n";
    total += rep;
  }
  std::cout << "parameters       " << total.parameters << "\n"
            << "checked          " << total.checked << "\n"
            << "flagged discrete " << total.flagged << " (" << std::setprecision(3) << 100 * total.flagged_fraction()
            << "%)\n"
            << "max rel error    " << std::scientific << total.max_rel_error << " at " << total.worst << " (analytic "
            << total.worst_analytic << ", numeric " << total.worst_numeric << ")\n"
            << "tolerance        " << a.tolerance << "\n";
  const bool ok = total.passed(o);
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitTolerance;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 0;
  int primitives = 5, k = 6, views = 8, test_views = 4, size = 96;
  bool random = false;
  std::string scaling_mode = "depth";
  double perturb = 0.05;
};

int cmd_synth(const SynthArgs& a) {
  if (a.out.empty()) throw UsageError("synth: --out is required");
  SynthOptions o;
  o.primitives = a.primitives;
  o.k = a.k;
  o.preset = !a.random;
  o.train_views = a.views;
  o.test_views = a.test_views;
  o.size = a.size;
  o.seed = a.seed;
  try {
    o.mode = parse_scaling_mode(a.scaling_mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto d = make_synth(o);

  const fs::path out(a.out);
  ensure_dir(out / "images");
  io::SceneBundle b;
  b.background = d.truth.background;
  b.points_file = "points.ply";
  auto add = [&](const View& v, io::Split split) {
    const std::string rel = "images/" + v.name + ".png";
    io::write_png((out / rel).string(), v.target);
    b.cameras.push_back({v.camera, rel, split});
  };
  for (const auto& v : d.train) add(v, io::Split::Train);
  for (const auto& v : d.test) add(v, io::Split::Test);
  std::vector<io::PlyPoint> pts;
  for (const auto& p : scene_point_cloud(d.truth)) pts.push_back(io::to_ply(p));
  io::write_ply_file((out / "points.ply").string(), pts);
  io::write_bundle_json(out / "scene.json", b);
  io::save_checkpoint_file((out / "truth.3dcs").string(), d.truth, io::Precision::Float32);
  const auto perturbed = perturb_scene(d.truth, a.perturb * d.truth.scene_extent, a.seed + 1);
  io::save_checkpoint_file((out / "perturbed.3dcs").string(), perturbed, io::Precision::Float32);
  std::cout << "wrote " << d.train.size() << " train and " << d.test.size() << " test views of a "
            << d.truth.size() << "-primitive scene to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cvxsplat: differentiable smooth-convex splatting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cvxsplat 0.1.0");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "optimize a scene from a bundle of posed images");
  train_cmd->add_option("--scene", ta.scene, "scene bundle (scene.json or its directory)");
  train_cmd->add_option("--out", ta.out, "output directory");
  train_cmd->add_option("--init", ta.init, "start from this checkpoint instead of the point cloud");
  train_cmd->add_option("--iterations", ta.iterations, "training iterations (overrides total_iterations)");
  train_cmd->add_option("--k-points", ta.k, "points per primitive")->check(CLI::Range(4, 64));
  train_cmd->add_option("--sh-degree", ta.sh_degree, "spherical harmonics degree")->check(CLI::Range(0, 3));
  train_cmd->add_option("--precision", ta.precision, "checkpoint precision")->check(CLI::IsMember({16, 32}));
  train_cmd->add_option("--preview-view", ta.preview_view, "training view used for preview images");
  train_cmd->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { ta.seed = s; ta.seed_set = true; },
                                                "random seed");
  ta.flags.add_to(train_cmd);

  RenderArgs ra;
  auto* render_cmd = app.add_subcommand("render", "render a checkpoint from the cameras of a bundle");
  render_cmd->add_option("--checkpoint", ra.checkpoint, "checkpoint file");
  render_cmd->add_option("--cameras", ra.cameras, "bundle whose cameras are rendered");
  render_cmd->add_option("--out", ra.out, "output directory");
  render_cmd->add_option("--split", ra.split, "all|train|test")->check(CLI::IsMember({"all", "train", "test"}));
  render_cmd->add_flag("--compare", ra.compare, "print PSNR against the bundle images");
  render_cmd->add_flag("--overlay", ra.overlay, "draw hull lines and points");
  ra.flags.add_to(render_cmd);

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM of rendered PNGs against targets");
  eval_cmd->add_option("--renders", ea.renders, "directory of rendered PNGs");
  eval_cmd->add_option("--targets", ea.targets, "directory of target PNGs (matched by sorted name)");
  eval_cmd->add_option("--csv", ea.csv, "write the table as CSV here");

  Fit2dArgs fa;
  auto* fit_cmd = app.add_subcommand("fit2d", "fit primitives to a single image with an orthographic camera");
  fit_cmd->add_option("--target", fa.target, "rectangle|circle|gaussian|aniso-gaussian|solid");
  fit_cmd->add_option("--target-image", fa.target_image, "PNG target instead of a procedural one");
  fit_cmd->add_option("--size", fa.size, "procedural target size")->check(CLI::Range(8, 4096));
  fit_cmd->add_option("--num-primitives", fa.primitives, "number of primitives")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--k-points", fa.k, "points per primitive")->check(CLI::Range(3, 64));
  fit_cmd->add_option("--iterations", fa.iterations, "iterations")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--seed", fa.seed, "random seed");
  fit_cmd->add_option("--out", fa.out, "directory for snapshots");
  fit_cmd->add_option("--milestones", fa.milestones, "iterations at which to snapshot");
  fit_cmd->add_flag("--overlay", fa.overlay, "also write hull-overlay snapshots");
  fit_cmd->add_option("--min-psnr", fa.min_psnr, "exit 3 if the final PSNR is below this");

  GradcheckArgs ga;
  auto* grad_cmd = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  grad_cmd->add_option("--seed", ga.seed, "first scene seed");
  grad_cmd->add_option("--scenes", ga.scenes, "number of random scenes")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--primitives", ga.primitives, "primitives per scene")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--k-points", ga.k, "points per primitive")->check(CLI::Range(4, 64));
  grad_cmd->add_option("--size", ga.size, "image size")->check(CLI::Range(4, 512));
  grad_cmd->add_option("--tolerance", ga.tolerance, "max relative error");
  grad_cmd->add_option("--max-flagged", ga.max_flagged, "max fraction of flagged parameters");

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic ground-truth bundle");
  synth_cmd->add_option("--out", sa.out, "output directory");
  synth_cmd->add_option("--seed", sa.seed, "random seed");
  synth_cmd->add_option("--primitives", sa.primitives, "primitive count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--k-points", sa.k, "points per primitive")->check(CLI::Range(4, 64));
  synth_cmd->add_option("--views", sa.views, "training cameras on the ring")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--test-views", sa.test_views, "held-out cameras at mid-angles")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--size", sa.size, "image size")->check(CLI::Range(8, 4096));
  synth_cmd->add_flag("--random", sa.random, "random scene instead of the preset");
  synth_cmd->add_option("--scaling-mode", sa.scaling_mode, "none|sqrt|depth|depth2");
  synth_cmd->add_option("--perturb", sa.perturb, "position offset of perturbed.3dcs, as a fraction of the extent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*render_cmd) return cmd_render(ra);
    if (*eval_cmd) return cmd_eval(ea);
    if (*fit_cmd) return cmd_fit2d(fa);
    if (*grad_cmd) return cmd_gradcheck(ga);
    if (*synth_cmd) return cmd_synth(sa);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
