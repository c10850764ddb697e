#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "monolocal/config.hpp"
#include "monolocal/dimensions.hpp"

namespace monolocal::cli {

struct CalibrateOptions {
  std::filesystem::path frame, correspondences, out;
  bool no_detect = false;
  double snap_px = 5.0;
  double inlier_px = 2.0;
  std::uint64_t seed = 0;
};

struct LocalizeOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  bool overlay = false;
  bool timing = false;
  std::optional<std::string> classifier;
  std::optional<std::uint64_t> seed;
};

struct SuiteOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

struct RenderMapOptions {
  std::filesystem::path calibration, frame, out;
  std::string extent = "-5000,0,5000,15000";
  double scale = 20.0;
};

struct RenderSceneOptions {
  std::filesystem::path out;
  std::optional<std::string> pose;
  std::string model_id = "test_vehicle";
  std::optional<std::filesystem::path> correspondences;
  double pixel_noise = 0.0;
  std::uint64_t seed = 0;
};

int cmd_calibrate(const CalibrateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_localize(const LocalizeOptions& opt, std::ostream& out, std::ostream& err);
int cmd_suite(const SuiteOptions& opt, std::ostream& out, std::ostream& err);
int cmd_render_map(const RenderMapOptions& opt, std::ostream& out, std::ostream& err);
int cmd_render_scene(const RenderSceneOptions& opt, std::ostream& out, std::ostream& err);

// "mock", "sidecar:<url>" or "override:<file>".
std::unique_ptr<Classifier> make_classifier(const std::string& spec, const SpecDatabase& db, const Config& cfg,
                                            std::uint64_t seed);

}  // namespace monolocal::cli
