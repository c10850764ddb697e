#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "monolocal/geometry.hpp"
#include "monolocal/image.hpp"
#include "monolocal/imgproc.hpp"

namespace monolocal {

enum class CornerKind { NearLeft, NearRight, FarLeft, FarRight };

std::string_view to_string(CornerKind kind);

struct MarkerCorner {
  ImagePoint image;
  int marker_id = 0;
  CornerKind kind = CornerKind::NearLeft;
};

struct MarkerDetectParams {
  std::vector<HsvBand> bands = {
      HsvBand{0, 179, 0, 60, 180, 255},    // white paint
      HsvBand{20, 35, 80, 255, 120, 255},  // yellow paint
  };
  std::size_t min_area = 100;
  std::size_t max_area = 20000;
  double min_elongation = 3.0;
  int hough_votes = 6;
  // Second side of a pair must be within this angle of the first.
  double pair_angle_deg = 20.0;
};

// Corners sorted by marker, then kind.
std::vector<MarkerCorner> detect_marker_corners(const RasterImage& frame,
                                                const MarkerDetectParams& params = {});

struct CalibrationResult {
  Homography homography;
  std::size_t inliers = 0;
  double rms_reproj_px = 0.0;
  double rms_world_mm = 0.0;
  std::vector<std::size_t> inlier_indices;  // into the correspondence list
};

CalibrationResult calibrate(std::span<const Correspondence> corrs, double inlier_px,
                            std::uint64_t seed, int max_iters = 500);

// pairing[i] = (corner index, world index).
CalibrationResult calibrate(std::span<const MarkerCorner> corners, std::span<const WorldPoint> world,
                            std::span<const std::pair<std::size_t, std::size_t>> pairing,
                            double inlier_px, std::uint64_t seed, int max_iters = 500);

// Replaces each correspondence's image point by the nearest detected corner
// within `max_px`; entries with no corner that close are dropped.
std::vector<Correspondence> snap_to_corners(std::span<const Correspondence> corrs,
                                            std::span<const MarkerCorner> corners, double max_px);

struct WorldRect {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;
};

// Output pixel (i, j) samples the frame at project(H, (x_min + i*scale, y_min + j*scale)).
RasterImage render_ground_map(const RasterImage& frame, const Homography& h, const WorldRect& extent,
                              double scale_mm_per_px);

void write_calibration(const std::filesystem::path& path, const CalibrationResult& result);
std::string format_calibration(const CalibrationResult& result);
CalibrationResult parse_calibration(const std::string& text);
CalibrationResult read_calibration(const std::filesystem::path& path);

}  // namespace monolocal
