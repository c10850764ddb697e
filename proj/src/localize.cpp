#include "monolocal/localize.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

namespace monolocal {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

WorldPoint unit(WorldPoint v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw Error(ErrorCode::DegenerateConfiguration, "zero-length direction");
  return (1.0 / n) * v;
}

WorldPoint unproject_key(const Homography& h, ImagePoint p) {
  try {
    return unproject(h, p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::PointAtInfinity) {
      throw Error(ErrorCode::AnchorBeyondHorizon, "key point lies on or beyond the horizon");
    }
    throw;
  }
}

std::string fixed3(double v) {
  if (std::abs(v) < 0.0005) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

double normalize_heading_deg(double deg) {
  deg = std::fmod(deg, 180.0);
  if (deg > 90.0) deg -= 180.0;
  if (deg <= -90.0) deg += 180.0;
  return deg;
}

double heading_of(WorldPoint axis) { return normalize_heading_deg(std::atan2(axis.x, axis.y) * kRadToDeg); }

std::array<WorldPoint, 4> box_corners(WorldPoint center, WorldPoint length_axis, double length_mm,
                                      double width_mm) {
  const WorldPoint d = unit(length_axis);
  const WorldPoint facing = -1.0 * d;
  const WorldPoint left{-facing.y, facing.x};
  const WorldPoint front = center - (0.5 * length_mm) * d;
  const WorldPoint rear = center + (0.5 * length_mm) * d;
  const WorldPoint half = (0.5 * width_mm) * left;
  return {front + half, rear + half, rear - half, front - half};
}

VehiclePose make_pose(WorldPoint center, WorldPoint length_axis, AnchorKind kind, const VehicleSpec& spec) {
  VehiclePose pose;
  pose.center = center;
  pose.heading_deg = heading_of(length_axis);
  pose.corners = box_corners(center, length_axis, spec.length_mm, spec.width_mm);
  pose.anchor_kind = kind;
  pose.spec = spec;
  return pose;
}

VehiclePose compose_pose(const FootprintKeys& keys, const Homography& h, const VehicleSpec& spec) {
  const WorldPoint a = unproject_key(h, keys.anchor);
  const WorldPoint c = unproject_key(h, keys.C);
  const WorldPoint d = unit(c - a);
  if (keys.anchor_kind == AnchorKind::PlateO) {
    return make_pose(a + (0.5 * spec.length_mm) * d, d, keys.anchor_kind, spec);
  }
  // Q sits on the near side edge halfway between the axles; d points across the body.
  WorldPoint length_axis{d.y, -d.x};
  if (length_axis.y < 0.0 || (length_axis.y == 0.0 && length_axis.x < 0.0)) {
    length_axis = -1.0 * length_axis;
  }
  return make_pose(a + (0.5 * spec.width_mm) * d, length_axis, keys.anchor_kind, spec);
}

PoseError pose_error(const GroundPose& real, const GroundPose& est, const VehicleSpec& spec) {
  PoseError e;
  e.dx_mm = est.center.x - real.center.x;
  e.dy_mm = est.center.y - real.center.y;
  e.dangle_deg = normalize_heading_deg(est.heading_deg - real.heading_deg);
  e.pos_mm = std::hypot(e.dx_mm, e.dy_mm);
  e.dx_pct = std::abs(e.dx_mm) / spec.length_mm * 100.0;
  e.dy_pct = std::abs(e.dy_mm) / spec.width_mm * 100.0;
  e.pos_pct = e.pos_mm / std::hypot(spec.length_mm, spec.width_mm) * 100.0;
  return e;
}

double combine_accuracy(double pos_pct, double dim_pct) {
  if (pos_pct < 0.0 || dim_pct < 0.0) throw Error(ErrorCode::InvalidArgument, "accuracies must be >= 0");
  return std::hypot(pos_pct, dim_pct);
}

std::string pose_json(std::size_t frame, const VehiclePose& pose) {
  std::string out = "{\"frame\": " + std::to_string(frame);
  out += ", \"model_id\": " + nlohmann::json(pose.spec.model_id).dump();
  out += ", \"anchor\": \"" + std::string(to_string(pose.anchor_kind)) + "\"";
  out += ", \"center_mm\": [" + fixed3(pose.center.x) + ", " + fixed3(pose.center.y) + "]";
  out += ", \"heading_deg\": " + fixed3(pose.heading_deg);
  out += ", \"corners_mm\": [";
  for (std::size_t i = 0; i < pose.corners.size(); ++i) {
    if (i) out += ", ";
    out += "[" + fixed3(pose.corners[i].x) + ", " + fixed3(pose.corners[i].y) + "]";
  }
  out += "], \"dims_mm\": [" + fixed3(pose.spec.length_mm) + ", " + fixed3(pose.spec.width_mm) + ", " +
         fixed3(pose.spec.height_mm) + "]}";
  return out;
}

std::string status_json(std::size_t frame, const std::string& status, const std::string& detail) {
  std::string out = "{\"frame\": " + std::to_string(frame) + ", \"status\": " + nlohmann::json(status).dump();
  if (!detail.empty()) out += ", \"detail\": " + nlohmann::json(detail).dump();
  return out + "}";
}

}  // namespace monolocal
