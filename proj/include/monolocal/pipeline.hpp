#pragma once

#include <optional>
#include <random>
#include <string>

#include "monolocal/background.hpp"
#include "monolocal/dimensions.hpp"
#include "monolocal/footprint.hpp"
#include "monolocal/geometry.hpp"
#include "monolocal/localize.hpp"

namespace monolocal {

struct PipelineParams {
  BackgroundParams background;
  std::size_t bootstrap_frames = 150;
  std::size_t min_roi_area = 500;
  bool remove_shadows = true;
  BodyLineParams body;
  PlateParams plate;
  WheelParams wheel;
  double c_dist_px = 100.0;
  KeyOrientation orientation = KeyOrientation::GroundNormal;
};

// Gaussian jitter applied to detector outputs (line endpoints, plate centre,
// wheel contacts) to model imperfect detections. sigma = 0 disables it.
struct DetectionNoise {
  double sigma_px = 0.0;
  std::mt19937_64* rng = nullptr;
};

enum class FrameStatus { Ok, Bootstrap, NoVehicle, ClassifierError, NoAnchor, Error };
std::string_view to_string(FrameStatus s);

struct FrameResult {
  FrameStatus status = FrameStatus::Error;
  std::string detail;
  std::optional<VehiclePose> pose;
  std::optional<FootprintKeys> keys;  // frame coordinates
  std::optional<RoiBox> plate_box;    // frame coordinates
  std::optional<RoiBox> roi;
  double elapsed_ms = 0.0;
};

// Everything after segmentation for one frame. Never throws for per-frame
// failures; they come back as a status.
FrameResult locate_vehicle(const RasterImage& frame, const RasterImage& foreground, const Homography& h,
                           const SpecDatabase& db, Classifier& classifier, const PipelineParams& params,
                           const ClassifyContext& ctx, const DetectionNoise& noise = {});

// Stateful per-stream driver: bootstrap, then segment, drop shadows and locate.
class FramePipeline {
 public:
  FramePipeline(Homography h, const SpecDatabase& db, Classifier& classifier, PipelineParams params);

  // Starts from an existing background model instead of bootstrapping.
  void set_background(BackgroundModel model);
  const std::optional<BackgroundModel>& background() const noexcept { return model_; }

  FrameResult process(const RasterImage& frame, const ClassifyContext& ctx, const DetectionNoise& noise = {});

 private:
  Homography h_;
  const SpecDatabase* db_;
  Classifier* classifier_;
  PipelineParams params_;
  BootstrapAccumulator acc_;
  std::optional<BackgroundModel> model_;
};

}  // namespace monolocal
