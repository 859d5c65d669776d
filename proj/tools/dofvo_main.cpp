#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dofvo/commands.hpp"
#include "dofvo/config.hpp"
#include "dofvo/error.hpp"
#include "dofvo/synthetic.hpp"

namespace {

int exit_code(dofvo::ErrorKind k) {
  switch (k) {
    case dofvo::ErrorKind::Usage:
      return 1;
    case dofvo::ErrorKind::Data:
      return 2;
    case dofvo::ErrorKind::Numerical:
      return 3;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dofvo: monocular visual odometry with per-DoF refinement networks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, dataset, out_dir, mode, units = "rad";
  std::optional<std::uint64_t> seed;
  bool no_align = false;
  dofvo::CommandContext ctx;
  std::vector<std::string> activations;
  std::string gt, raw, refined, model;

  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override run.seed");
  app.add_option("--out", out_dir, "override run.output_dir");
  app.add_option("--mode", mode, "override frontend.mode")->check(CLI::IsMember({"essential", "fundamental"}));
  app.add_option("--dataset", dataset, "override dataset.root");
  app.add_flag("--no-align", no_align, "report ATE without rigid alignment");
  app.add_option("--units", units, "rotation units in reports")->check(CLI::IsMember({"deg", "rad"}));
  app.add_option("--threads", ctx.threads, "worker threads (0: all cores)");
  app.add_option("--gt", gt, "relative ground-truth CSV (default <out>/relative_gt.csv)");
  app.add_option("--raw", raw, "raw pose CSV (default <out>/raw_poses.csv)");
  app.add_option("--refined", refined, "refined pose CSV (default <out>/refined_poses.csv)");
  app.add_option("--model", model, "model file (default <out>/model.odof)");

  auto* init = app.add_subcommand("init-config", "write an annotated default configuration");
  std::string init_path = "dofvo.ini";
  init->add_option("path", init_path, "destination file");
  app.add_subcommand("convert-gt", "absolute ground truth to per-pair relative poses");
  app.add_subcommand("run-vo", "run the classical frontend over consecutive frame pairs");
  app.add_subcommand("train", "train the six branches and the fusion head");
  app.add_subcommand("infer", "refine raw poses with a trained model");
  auto* eval = app.add_subcommand("eval", "RPE and ATE reports for raw and refined poses");
  eval->add_flag("--test-only", ctx.test_only, "evaluate only the held-out test block");
  auto* ablate = app.add_subcommand("ablate", "train and evaluate once per activation kind");
  ablate->add_option("--activations", activations, "subset, e.g. relu tanh (default: all six)");
  auto* fixture = app.add_subcommand("make-fixture", "write a rendered synthetic sequence in ASL layout");
  std::string fixture_path;
  dofvo::synthetic::DatasetSpec spec;
  std::string motion = "smooth";
  std::vector<int> corrupt;
  fixture->add_option("path", fixture_path, "destination directory")->required();
  fixture->add_option("--frames", spec.frames, "number of frames")->check(CLI::Range(2, 100000));
  fixture->add_option("--motion", motion, "smooth | straight")->check(CLI::IsMember({"smooth", "straight"}));
  fixture->add_option("--corrupt", corrupt, "frame indices rendered as flat white");
  auto* bench = app.add_subcommand("bench", "per-stage latency report");
  bench->add_option("--pairs", ctx.bench_pairs, "number of pairs to time")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (init->parsed()) {
      dofvo::cmd_init_config(init_path);
      std::cout << "wrote " << init_path << '\n';
      return 0;
    }
    if (fixture->parsed()) {
      spec.motion = motion == "straight" ? dofvo::synthetic::Motion::Straight : dofvo::synthetic::Motion::Smooth;
      if (seed) spec.seed = *seed;
      spec.corrupt_frames.insert(corrupt.begin(), corrupt.end());
      dofvo::synthetic::write_dataset(fixture_path, spec);
      const auto& k = spec.intrinsics;
      std::cout << "wrote " << spec.frames << " frames to " << fixture_path << " (intrinsics fx " << k.fx << " fy " << k.fy
                << " cx " << k.cx << " cy " << k.cy << ")\n";
      return 0;
    }
    dofvo::PipelineConfig cfg = config_path.empty() ? dofvo::PipelineConfig{} : dofvo::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!mode.empty()) cfg.frontend.mode = dofvo::parse_geometry_mode(mode);
    if (!dataset.empty()) cfg.dataset_root = dataset;
    cfg.validate();

    ctx.config = cfg;
    ctx.align = !no_align;
    ctx.units = dofvo::parse_angle_units(units);
    ctx.gt_csv = gt;
    ctx.raw_csv = raw;
    ctx.refined_csv = refined;
    ctx.model_path = model;
    for (const auto& a : activations) ctx.activations.push_back(dofvo::parse_activation(a));

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "convert-gt") {
      dofvo::cmd_convert_gt(ctx);
    } else if (name == "run-vo") {
      dofvo::cmd_run_vo(ctx);
    } else if (name == "train") {
      dofvo::cmd_train(ctx);
    } else if (name == "infer") {
      dofvo::cmd_infer(ctx);
    } else if (name == "eval") {
      dofvo::cmd_eval(ctx);
    } else if (name == "ablate") {
      dofvo::cmd_ablate(ctx);
    } else if (name == "bench") {
      dofvo::cmd_bench(ctx);
    }
  } catch (const dofvo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
