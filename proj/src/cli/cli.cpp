#include "monolocal/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "commands.hpp"

namespace monolocal::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular vehicle localization on a calibrated road plane", "monolocal"};
  app.require_subcommand(1);

  CalibrateOptions cal;
  auto* c = app.add_subcommand("calibrate", "Fit the ground-plane homography from lane-marker corners");
  c->add_option("frame", cal.frame, "Frame showing the lane markers (PPM)")->required();
  c->add_option("correspondences", cal.correspondences, "world_x world_y image_x image_y per line")->required();
  c->add_option("--out", cal.out, "Calibration file to write")->required();
  c->add_flag("--no-detect", cal.no_detect, "Use the image points from the file as they are");
  c->add_option("--snap-px", cal.snap_px, "Max distance from a listed point to a detected corner");
  c->add_option("--inlier-px", cal.inlier_px, "RANSAC inlier threshold");
  c->add_option("--seed", cal.seed, "RANSAC seed");

  LocalizeOptions loc;
  auto* l = app.add_subcommand("localize", "Stream frames and emit one pose record per frame");
  l->add_option("--config", loc.config, "Pipeline config")->required();
  l->add_option("--out", loc.out, "JSON-lines output file (default stdout)");
  l->add_flag("--overlay", loc.overlay, "Write <frame>_footprint.ppm per located vehicle");
  l->add_flag("--timing", loc.timing, "Report per-frame latency on stderr");
  l->add_option("--classifier", loc.classifier, "mock | sidecar:<url> | override:<file>");
  l->add_option("--seed", loc.seed, "Seed for the mock classifier");

  SuiteOptions su;
  auto* s = app.add_subcommand("suite", "Run the synthetic accuracy suite");
  s->add_option("--config", su.config, "Suite config (defaults when absent)");
  s->add_option("--out", su.out_dir, "Directory for suite_report.csv and suite_report.txt");
  s->add_option("--seed", su.seed, "Suite seed");
  s->add_flag("--timing", su.timing, "Report wall time on stderr");

  RenderMapOptions rm;
  auto* r = app.add_subcommand("render-map", "Warp a frame onto a top-down ground map");
  r->add_option("--calibration", rm.calibration, "Calibration file")->required();
  r->add_option("--frame", rm.frame, "Input frame (PPM)")->required();
  r->add_option("--out", rm.out, "Output PPM")->required();
  r->add_option("--extent", rm.extent, "x_min,y_min,x_max,y_max in mm");
  r->add_option("--scale", rm.scale, "mm per output pixel");

  RenderSceneOptions rs;
  auto* g = app.add_subcommand("render-scene", "Render a synthetic road frame, optionally with a vehicle");
  g->add_option("--out", rs.out, "Output PPM")->required();
  g->add_option("--pose", rs.pose, "x_mm,y_mm,heading_deg of the vehicle");
  g->add_option("--model", rs.model_id, "Vehicle model id from the spec database");
  g->add_option("--correspondences", rs.correspondences, "Also write the exact marker correspondences here");
  g->add_option("--pixel-noise", rs.pixel_noise, "Gaussian intensity noise sigma");
  g->add_option("--seed", rs.seed, "Noise seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (c->parsed()) return cmd_calibrate(cal, out, err);
    if (l->parsed()) return cmd_localize(loc, out, err);
    if (s->parsed()) return cmd_suite(su, out, err);
    if (r->parsed()) return cmd_render_map(rm, out, err);
    if (g->parsed()) return cmd_render_scene(rs, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace monolocal::cli
