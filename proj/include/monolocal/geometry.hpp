#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "monolocal/imgproc.hpp"

namespace monolocal {

using ImagePoint = Point2;

// Ground-plane point in millimetres: x across the road (to the right), y along it.
struct WorldPoint {
  double x = 0.0, y = 0.0;
  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

inline WorldPoint operator+(WorldPoint a, WorldPoint b) { return {a.x + b.x, a.y + b.y}; }
inline WorldPoint operator-(WorldPoint a, WorldPoint b) { return {a.x - b.x, a.y - b.y}; }
inline WorldPoint operator*(double s, WorldPoint a) { return {s * a.x, s * a.y}; }
inline double dot(WorldPoint a, WorldPoint b) { return a.x * b.x + a.y * b.y; }
double norm(WorldPoint a);

struct Correspondence {
  WorldPoint world;
  ImagePoint image;
};

// Projective map from ground-plane world coordinates to image coordinates.
// Stored with unit Frobenius norm and h33 >= 0 so equal maps compare equal.
class Homography {
 public:
  static Homography identity();
  // Gauge-fixes `m`; throws DegenerateConfiguration when it is not invertible.
  static Homography from_matrix(const Eigen::Matrix3d& m);
  static Homography from_entries(const std::array<double, 9>& row_major);

  const std::array<double, 9>& entries() const noexcept { return h_; }
  Eigen::Matrix3d matrix() const;
  const Eigen::Matrix3d& inverse() const noexcept { return inverse_; }

 private:
  Homography() = default;
  std::array<double, 9> h_{};
  Eigen::Matrix3d inverse_;
};

// Throws PointAtInfinity when the homogeneous scale vanishes.
ImagePoint project(const Homography& h, WorldPoint p);
WorldPoint unproject(const Homography& h, ImagePoint p);

double reprojection_error(const Homography& h, const Correspondence& c);

// Hartley-normalized DLT; exact on noise-free data.
Homography dlt_fit(std::span<const Correspondence> corrs);

struct RansacResult {
  Homography homography;
  std::vector<std::size_t> inliers;  // ascending indices into the input
};

struct RansacParams {
  double inlier_px = 2.0;
  int max_iters = 500;
  std::uint64_t seed = 0;
};

RansacResult ransac_fit(std::span<const Correspondence> corrs, const RansacParams& params);
inline RansacResult ransac_fit(std::span<const Correspondence> corrs, double inlier_px,
                               int max_iters, std::uint64_t seed) {
  return ransac_fit(corrs, RansacParams{inlier_px, max_iters, seed});
}

// Unbiased index in [0, n) from a 64-bit engine (portable across standard libraries).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

// "world_x_mm world_y_mm image_x_px image_y_px" per line; '#' comments.
std::vector<Correspondence> parse_correspondences(const std::string& text);
std::vector<Correspondence> read_correspondences(const std::filesystem::path& path);

}  // namespace monolocal
