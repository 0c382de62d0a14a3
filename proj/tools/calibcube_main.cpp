#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "calibcube/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"One-target extrinsic calibration for event camera, LiDAR, and RGB"};
  app.require_subcommand(1);

  // Each subcommand binds its own variables: options must not bleed into a
  // sibling command through a shared buffer.
  struct {
    std::string config, out;
    uint64_t seed = 0;
    bool seed_set = false;
  } sim_args, cal_args;
  struct {
    std::string calib, groundtruth, out = "evaluation.json";
  } eva_args;
  struct {
    std::string calib, cloud, media, intrinsics, out;
  } rep_args;

  CLI::App* sim = app.add_subcommand("simulate", "Render a synthetic scene to a directory");
  sim->add_option("--config", sim_args.config, "SceneConfig TOML")->required();
  sim->add_option("--out", sim_args.out, "output directory")->required();
  sim->add_option("--seed", sim_args.seed, "override the scene seed")
      ->each([&sim_args](const std::string&) { sim_args.seed_set = true; });

  CLI::App* cal = app.add_subcommand("calibrate", "Run the three-branch calibration");
  cal->add_option("--config", cal_args.config, "PipelineConfig TOML")->required();
  cal->add_option("--out", cal_args.out, "override the configured output directory");
  cal->add_option("--seed", cal_args.seed, "override the configured seed")
      ->each([&cal_args](const std::string&) { cal_args.seed_set = true; });

  CLI::App* eva = app.add_subcommand("evaluate", "Compare a calibration to ground truth");
  eva->add_option("--calib", eva_args.calib, "extrinsics JSON")->required();
  eva->add_option("--groundtruth", eva_args.groundtruth, "scene groundtruth.json")
      ->required();
  eva->add_option("--out", eva_args.out, "evaluation JSON path (default evaluation.json)");

  CLI::App* rep = app.add_subcommand("report", "Project a cloud over an image or event frame");
  rep->add_option("--calib", rep_args.calib, "extrinsics JSON")->required();
  rep->add_option("--cloud", rep_args.cloud, "point cloud (.ply or .csv)")->required();
  rep->add_option("--media", rep_args.media,
                  "image (.pgm/.png) or event stream (.csv/.evb)")
      ->required();
  rep->add_option("--intrinsics", rep_args.intrinsics, "camera intrinsics TOML")
      ->required();
  rep->add_option("--out", rep_args.out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (app.got_subcommand(sim))
    return calibcube::cmd_simulate(
        sim_args.config, sim_args.out,
        sim_args.seed_set ? std::optional<uint64_t>(sim_args.seed) : std::nullopt);
  if (app.got_subcommand(cal))
    return calibcube::cmd_calibrate(
        cal_args.config, cal_args.out,
        cal_args.seed_set ? std::optional<uint64_t>(cal_args.seed) : std::nullopt);
  if (app.got_subcommand(eva))
    return calibcube::cmd_evaluate(eva_args.calib, eva_args.groundtruth, eva_args.out);
  return calibcube::cmd_report(rep_args.calib, rep_args.cloud, rep_args.media,
                               rep_args.intrinsics, rep_args.out);
}
