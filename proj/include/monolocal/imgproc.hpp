#pragma once

#include <array>
#include <optional>
#include <vector>

#include "monolocal/image.hpp"
#include "monolocal/kernels.hpp"

namespace monolocal {

using kernels::HsvBand;

// Continuous image coordinates: pixel (x, y) has its center at (x, y).
struct Point2 {
  double x = 0.0, y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
double dot(Point2 a, Point2 b);
double norm(Point2 a);

// Line in normal form x*cos(theta) + y*sin(theta) = rho, theta in [0, pi).
// Every image line has exactly one such representation; rho is signed.
struct LineRT {
  double rho = 0.0;
  double theta = 0.0;
  int votes = 0;

  Point2 normal() const;
  // Unit direction along the line, normal rotated by +90 degrees.
  Point2 direction() const;
  double signed_distance(Point2 p) const { return dot(normal(), p) - rho; }
  Point2 closest_point(Point2 p) const;

  static LineRT from_normal(double theta, double rho, int votes = 0);
  static LineRT through(Point2 p, Point2 direction, int votes = 0);
  LineRT translated(Point2 offset) const;
};

std::optional<Point2> intersect(const LineRT& a, const LineRT& b);

// Smallest angle between two line orientations, in [0, pi/2].
double line_angle_difference(double theta_a, double theta_b);

// Mean orientation of undirected angles (period pi), via doubled-angle vectors.
double circular_mean_pi(const std::vector<double>& thetas);

struct Blob {
  int label = 0;
  std::size_t area = 0;
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  Point2 centroid;
};

struct LabeledBlobs {
  Image<std::int32_t> labels;  // 0 = background, else Blob::label
  std::vector<Blob> blobs;     // ordered by label (raster order of first pixel)
};

struct Gradients {
  FloatImage gx, gy, magnitude;
};

struct CannyParams {
  float low = 50.0f;
  float high = 150.0f;
  float sigma = 1.4f;
};

struct HoughParams {
  double rho_res = 1.0;
  double theta_res = 3.14159265358979323846 / 180.0;
  int vote_threshold = 30;
};

RasterImage to_grayscale(const RasterImage& rgb);

// H in [0, 180), S and V in [0, 255].
RasterImage to_hsv(const RasterImage& rgb);
RasterImage hsv_to_rgb(const RasterImage& hsv);
std::array<std::uint8_t, 3> rgb_to_hsv_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// 5x5 separable Gaussian with replicated borders.
FloatImage gaussian_blur(const RasterImage& gray, float sigma);
Gradients sobel(const FloatImage& img);

// Sobel gradients of the smoothed image, as seen by canny().
Gradients canny_gradients(const RasterImage& gray, float sigma);

RasterImage canny(const RasterImage& gray, const CannyParams& params = {});
inline RasterImage canny(const RasterImage& gray, float low, float high) {
  return canny(gray, CannyParams{low, high, 1.4f});
}

// Accumulator local maxima >= vote_threshold, sorted by votes descending, ties
// by (theta, rho) ascending.
std::vector<LineRT> hough_lines(const RasterImage& edges, const HoughParams& params);
inline std::vector<LineRT> hough_lines(const RasterImage& edges, double rho_res, double theta_res,
                                       int vote_threshold) {
  return hough_lines(edges, HoughParams{rho_res, theta_res, vote_threshold});
}

LabeledBlobs label_components(const RasterImage& mask, int connectivity = 8);
std::vector<Blob> connected_components(const RasterImage& mask, int connectivity = 8);

RasterImage color_mask(const RasterImage& hsv, const HsvBand& band);

// Midpoints between each foreground pixel and its 4-neighbour background pixels.
// `outward` is the unit step from the foreground pixel to the background one.
struct BoundaryPoint {
  Point2 position;
  Point2 outward;
};
std::vector<BoundaryPoint> boundary_points(const RasterImage& mask);

// Total-least-squares line through weighted points; nullopt when < 2 points.
std::optional<LineRT> fit_line(const std::vector<Point2>& points);

// Re-fits `line` to the boundary points within `band` px whose outward normal
// agrees with `outward_hint` (zero vector = accept all), trimming outliers.
std::optional<LineRT> refine_line_to_boundary(const LineRT& line,
                                              const std::vector<BoundaryPoint>& boundary,
                                              double band, Point2 outward_hint,
                                              int iterations = 4);

// Like refine_line_to_boundary, but only uses boundary points whose position
// along the line falls between `end_a` and `end_b` (shrunk by `margin` px),
// and whose outward normal points away from `inside`.
std::optional<LineRT> refine_segment_to_boundary(const LineRT& line, Point2 end_a, Point2 end_b,
                                                 Point2 inside,
                                                 const std::vector<BoundaryPoint>& boundary,
                                                 double band, double margin);

}  // namespace monolocal
