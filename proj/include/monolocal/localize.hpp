#pragma once

#include <array>
#include <string>

#include "monolocal/dimensions.hpp"
#include "monolocal/footprint.hpp"
#include "monolocal/geometry.hpp"

namespace monolocal {

// Heading: angle of the length axis from world +Y toward +X, in (-90, 90].
double normalize_heading_deg(double deg);
double heading_of(WorldPoint axis);

struct VehiclePose {
  WorldPoint center;
  double heading_deg = 0.0;
  std::array<WorldPoint, 4> corners{};  // FL, RL, RR, FR (counter-clockwise)
  AnchorKind anchor_kind = AnchorKind::PlateO;
  VehicleSpec spec;
};

// Box corners for a vehicle whose front faces -`length_axis`.
std::array<WorldPoint, 4> box_corners(WorldPoint center, WorldPoint length_axis, double length_mm,
                                      double width_mm);
VehiclePose make_pose(WorldPoint center, WorldPoint length_axis, AnchorKind kind, const VehicleSpec& spec);

VehiclePose compose_pose(const FootprintKeys& keys, const Homography& h, const VehicleSpec& spec);

struct GroundPose {
  WorldPoint center;
  double heading_deg = 0.0;
};

struct PoseError {
  double dx_mm = 0.0, dy_mm = 0.0, dangle_deg = 0.0, pos_mm = 0.0;
  double dx_pct = 0.0, dy_pct = 0.0, pos_pct = 0.0;
};

PoseError pose_error(const GroundPose& real, const GroundPose& est, const VehicleSpec& spec);
inline PoseError pose_error(const GroundPose& real, const VehiclePose& est, const VehicleSpec& spec) {
  return pose_error(real, GroundPose{est.center, est.heading_deg}, spec);
}

double combine_accuracy(double pos_pct, double dim_pct);

// One JSON object, fixed field order, numbers with at most 3 decimals.
std::string pose_json(std::size_t frame, const VehiclePose& pose);
std::string status_json(std::size_t frame, const std::string& status, const std::string& detail = {});

}  // namespace monolocal
