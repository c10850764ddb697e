#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "monolocal/geometry.hpp"
#include "monolocal/image.hpp"
#include "monolocal/imgproc.hpp"

namespace monolocal {

struct BodyLineParams {
  CannyParams canny{20.0f, 40.0f, 1.0f};
  HoughParams hough{1.0, 3.14159265358979323846 / 180.0, 20};
  double gate_deg = 15.0;
  bool suppress_body_color = true;
  // Edge pixels farther than this from the gate mask are dropped.
  int gate_dilate_px = 3;
};

struct BodyLines {
  std::vector<LineRT> width;
  std::vector<LineRT> side;
};

// theta_w / theta_s are the expected normal angles of width and side edges.
// `gate` (optional, ROI-sized binary) restricts edges to the vehicle.
BodyLines extract_body_lines(const RasterImage& roi, double theta_w, double theta_s,
                             const BodyLineParams& params = {}, const RasterImage* gate = nullptr);

// Expected (theta_w, theta_s). The dominant straight run of the blob's lower
// envelope is taken as a ground edge; the other family is its ground-plane
// perpendicular mapped back through `h`. `width_hint` is the normal angle of an
// image line known to run along the width (a plate edge) and decides which
// family the edge belongs to; without it the edge is taken as the side.
// `offset` maps mask pixels to frame pixels for `h`.
std::pair<double, double> expected_directions(const RasterImage& mask, const Homography& h,
                                              Point2 offset = {},
                                              std::optional<double> width_hint = std::nullopt);

struct FootprintLines {
  LineRT l_F;    // near width edge
  LineRT l_S;    // near side edge
  LineRT opp_F;  // far width edge
  LineRT opp_S;  // far side edge
  std::size_t support_W = 0, support_S = 0;
  Point2 centroid;  // foreground centroid

  FootprintLines translated(Point2 offset) const;
  // Corners of the four tangents: l_F∩l_S, l_F∩opp_S, opp_F∩opp_S, opp_F∩l_S.
  std::optional<std::array<Point2, 4>> corners() const;
};

FootprintLines synthesize_footprint_lines(const std::vector<LineRT>& width_lines,
                                          const std::vector<LineRT>& side_lines,
                                          const RasterImage& roi_mask);

// Re-fits each tangent to the mask boundary between its neighbouring tangents.
FootprintLines refine_footprint_lines(const FootprintLines& lines, const RasterImage& roi_mask,
                                      int passes = 2);

struct PlateParams {
  HsvBand band{100, 130, 80, 255, 40, 255};
  double min_aspect = 2.0, max_aspect = 6.0;
  double min_rel_area = 0.001, max_rel_area = 0.05;
};

struct PlateDetection {
  LineRT upper;
  LineRT lower;
  ImagePoint P;
  RoiBox bbox;
};

std::optional<PlateDetection> detect_plate(const RasterImage& roi, const PlateParams& params = {});

struct WheelParams {
  int dark_v_max = 60;
  double band_rel_height = 0.15;
  double min_fill = 0.6;
  double min_aspect = 0.4, max_aspect = 2.5;
  std::size_t min_area = 12;
};

struct WheelDetection {
  std::vector<ImagePoint> contacts;  // the two selected contacts
  ImagePoint Q;
};

std::optional<WheelDetection> detect_wheels(const RasterImage& roi, const LineRT& l_S,
                                            const WheelParams& params = {});

enum class AnchorKind { PlateO, WheelQ };
std::string_view to_string(AnchorKind k);

// How the direction of the anchor-to-C ray is chosen.
//  ImageParallel: along l_S (plate) or l_F (wheels) in the image.
//  VanishingPoint: toward the intersection of the near and far tangents of
//  that family, which follows the ground-plane direction under perspective.
//  GroundNormal: along the ground-plane perpendicular to the line the anchor
//  sits on (l_F for plate, l_S for wheels), mapped through the homography.
//  Needs the homography; the footprint is assumed rectangular.
enum class KeyOrientation { ImageParallel, VanishingPoint, GroundNormal };
std::string_view to_string(KeyOrientation o);
KeyOrientation parse_key_orientation(std::string_view s);

struct FootprintKeys {
  ImagePoint anchor;
  ImagePoint C;
  AnchorKind anchor_kind = AnchorKind::PlateO;
  FootprintLines lines;

  FootprintKeys translated(Point2 offset) const;
};

// `ground` maps world to ROI pixels; required for GroundNormal.
FootprintKeys select_keys(const FootprintLines& lines, const std::optional<PlateDetection>& plate,
                          const std::optional<WheelDetection>& wheels, double c_dist_px = 100.0,
                          KeyOrientation orientation = KeyOrientation::VanishingPoint,
                          const Homography* ground = nullptr);

}  // namespace monolocal
