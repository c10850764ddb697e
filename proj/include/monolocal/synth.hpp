#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monolocal/calibration.hpp"
#include "monolocal/dimensions.hpp"
#include "monolocal/footprint.hpp"
#include "monolocal/geometry.hpp"
#include "monolocal/image.hpp"
#include "monolocal/localize.hpp"
#include "monolocal/pipeline.hpp"

namespace monolocal::synth {

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Camera on a pole looking along +Y, pitched down. World Z is up, the road is Z = 0.
struct PinholeCamera {
  double focal_px = 1400.0;
  int width = 1280;
  int height = 720;
  Point3 position{0.0, -6000.0, 6000.0};
  double pitch_deg = 30.0;

  Eigen::Matrix<double, 3, 4> projection() const;
  Homography ground_homography() const;
  // Throws ElementBeyondHorizon when the point is not in front of the camera.
  ImagePoint project(const Point3& p) const;
};

struct MarkerRect {
  WorldPoint min, max;  // axis-aligned on the road
};

std::vector<MarkerRect> default_markers();

struct SceneColors {
  Rgb road{100, 100, 100};
  Rgb marker{235, 235, 235};
  Rgb body{160, 30, 30};
  Rgb plate{30, 60, 200};
  Rgb wheel{25, 25, 25};
};

struct SceneVehicle {
  VehicleSpec spec;
  WorldPoint center;
  double heading_deg = 0.0;
};

struct SceneSpec {
  PinholeCamera camera;
  std::vector<MarkerRect> markers = default_markers();
  std::optional<SceneVehicle> vehicle;
  SceneColors colors;
  double pixel_noise_sigma = 0.0;
  double plate_width_mm = 440.0, plate_height_mm = 140.0, plate_center_z_mm = 500.0;
  double wheel_radius_mm = 325.0;
};

struct GroundTruth {
  std::vector<Correspondence> marker_corners;  // exact projections of every marker corner
  std::optional<GroundPose> pose;
  AnchorKind anchor_kind = AnchorKind::PlateO;
  WorldPoint anchor_world;
  ImagePoint anchor_image;
  LineRT l_F, l_S;  // projected near bottom edges
  bool plate_visible = false;
};

struct Rendered {
  RasterImage frame;
  GroundTruth truth;
};

Rendered render(const SceneSpec& scene, std::uint64_t seed = 0);

struct SuitePose {
  std::string id;
  WorldPoint center;
  double heading_deg = 0.0;
};

// Six front-facing poses at about 10 m and 4 m, plus a side view that hides the plate.
std::vector<SuitePose> default_poses();

struct SuiteThresholds {
  double max_pos_mm = 20.0;
  double max_pos_pct = 100.0;
  double max_angle_deg = 0.5;
  std::optional<std::size_t> min_passing;  // all cases when unset
};

struct SuiteConfig {
  PinholeCamera camera;
  std::vector<SuitePose> poses = default_poses();
  std::string model_id = "test_vehicle";
  // Gaussian jitter on marker corners and on every detector output.
  double detection_noise_px = 0.0;
  double pixel_noise_sigma = 0.0;
  double corner_match_px = 5.0;
  double calibration_inlier_px = 2.0;
  PipelineParams pipeline = [] {
    PipelineParams p;
    p.min_roi_area = 200;
    return p;
  }();
  SuiteThresholds thresholds;
};

struct SuiteCase {
  std::string pose_id;
  GroundPose real;
  std::string status;
  std::string detail;
  std::optional<GroundPose> est;
  std::optional<PoseError> error;
  std::optional<AnchorKind> anchor_kind;
  bool passed = false;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  double detection_noise_px = 0.0;
  std::size_t calibration_inliers = 0;
  double calibration_rms_px = 0.0;
  std::vector<SuiteCase> cases;

  std::size_t passing() const;
  bool meets(const SuiteThresholds& t) const;
};

SuiteReport run_suite(const SuiteConfig& config, const SpecDatabase& db, std::uint64_t seed);

std::string format_csv(const SuiteReport& report);
std::string format_text(const SuiteReport& report);

}  // namespace monolocal::synth
