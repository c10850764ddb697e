#include "monolocal/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace monolocal {

std::string_view to_string(CornerKind kind) {
  switch (kind) {
    case CornerKind::NearLeft: return "near-left";
    case CornerKind::NearRight: return "near-right";
    case CornerKind::FarLeft: return "far-left";
    case CornerKind::FarRight: return "far-right";
  }
  return "unknown";
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double elongation(const LabeledBlobs& lb, const Blob& b) {
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int y = b.y_min; y <= b.y_max; ++y) {
    for (int x = b.x_min; x <= b.x_max; ++x) {
      if (lb.labels.at(x, y) != b.label) continue;
      const double dx = x - b.centroid.x, dy = y - b.centroid.y;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  }
  const double tr = sxx + syy;
  const double disc = std::sqrt(std::max(0.0, (sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy));
  const double l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
  if (l2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(l1 / l2);
}

// Strongest line that pairs with `first`: nearly parallel and on the other side of the blob.
std::optional<LineRT> partner(const std::vector<LineRT>& lines, const LineRT& first, Point2 centroid,
                              double max_angle) {
  const double side = first.signed_distance(centroid);
  for (const auto& l : lines) {
    if (line_angle_difference(l.theta, first.theta) > max_angle) continue;
    const double s = l.signed_distance(centroid);
    // Orientation may be flipped relative to `first`, so compare via the normals.
    const double aligned = dot(l.normal(), first.normal()) >= 0.0 ? s : -s;
    if (aligned * side < 0.0 && std::abs(aligned) >= 1.0) return l;
  }
  return std::nullopt;
}

std::optional<std::array<Point2, 4>> quad_corners(const std::array<LineRT, 4>& s) {
  // s = {long_a, long_b, short_a, short_b}; corners in cyclic order.
  const auto c0 = intersect(s[0], s[2]), c1 = intersect(s[0], s[3]);
  const auto c2 = intersect(s[1], s[3]), c3 = intersect(s[1], s[2]);
  if (!c0 || !c1 || !c2 || !c3) return std::nullopt;
  return std::array<Point2, 4>{*c0, *c1, *c2, *c3};
}

std::optional<std::array<Point2, 4>> blob_corners(const RasterImage& blob_mask, Point2 centroid,
                                                  const MarkerDetectParams& params) {
  const RasterImage edges = canny(blob_mask);
  auto lines = hough_lines(edges, HoughParams{1.0, kDeg, params.hough_votes});
  if (lines.size() < 4) return std::nullopt;
  const double pair_angle = params.pair_angle_deg * kDeg;

  const LineRT long_a = lines.front();
  const auto long_b = partner(lines, long_a, centroid, pair_angle);
  if (!long_b) return std::nullopt;
  std::optional<LineRT> short_a;
  for (const auto& l : lines) {
    if (line_angle_difference(l.theta, long_a.theta) >= 45.0 * kDeg) {
      short_a = l;
      break;
    }
  }
  if (!short_a) return std::nullopt;
  const auto short_b = partner(lines, *short_a, centroid, pair_angle);
  if (!short_b) return std::nullopt;

  std::array<LineRT, 4> sides{long_a, *long_b, *short_a, *short_b};
  auto corners = quad_corners(sides);
  if (!corners) return std::nullopt;

  const auto boundary = boundary_points(blob_mask);
  for (int pass = 0; pass < 2; ++pass) {
    const auto& c = *corners;
    // Each side with its two end corners, following quad_corners' layout.
    const std::array<std::pair<int, int>, 4> ends{{{0, 1}, {3, 2}, {0, 3}, {1, 2}}};
    std::array<LineRT, 4> refined = sides;
    for (int i = 0; i < 4; ++i) {
      if (auto r = refine_segment_to_boundary(sides[i], c[ends[i].first], c[ends[i].second],
                                                centroid, boundary, 2.5, 1.5)) {
        refined[i] = *r;
      }
    }
    sides = refined;
    auto next = quad_corners(sides);
    if (!next) return std::nullopt;
    corners = next;
  }
  return corners;
}

}  // namespace

std::vector<MarkerCorner> detect_marker_corners(const RasterImage& frame,
                                                const MarkerDetectParams& params) {
  if (frame.channels() != 3) throw Error(ErrorCode::InvalidChannels, "marker detection needs RGB");
  const RasterImage hsv = to_hsv(frame);
  RasterImage mask(frame.width(), frame.height(), 1);
  for (const auto& band : params.bands) {
    const RasterImage m = color_mask(hsv, band);
    auto dst = mask.data();
    const auto src = m.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  const LabeledBlobs lb = label_components(mask);

  std::vector<MarkerCorner> out;
  constexpr int kMargin = 3;
  for (std::size_t bi = 0; bi < lb.blobs.size(); ++bi) {
    const Blob& b = lb.blobs[bi];
    if (b.area < params.min_area || b.area > params.max_area) continue;
    if (elongation(lb, b) < params.min_elongation) continue;

    const int x0 = std::max(0, b.x_min - kMargin), y0 = std::max(0, b.y_min - kMargin);
    const int x1 = std::min(frame.width() - 1, b.x_max + kMargin);
    const int y1 = std::min(frame.height() - 1, b.y_max + kMargin);
    RasterImage blob_mask(x1 - x0 + 1, y1 - y0 + 1, 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (lb.labels.at(x, y) == b.label) blob_mask.at(x - x0, y - y0) = 255;
      }
    }
    const Point2 offset{static_cast<double>(x0), static_cast<double>(y0)};
    const auto corners = blob_corners(blob_mask, b.centroid - offset, params);
    if (!corners) continue;

    std::array<Point2, 4> pts = *corners;
    for (auto& p : pts) p = p + offset;
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 c) { return a.y > c.y; });
    if (pts[0].x > pts[1].x) std::swap(pts[0], pts[1]);
    if (pts[2].x > pts[3].x) std::swap(pts[2], pts[3]);
    const std::array<CornerKind, 4> kinds{CornerKind::NearLeft, CornerKind::NearRight,
                                          CornerKind::FarLeft, CornerKind::FarRight};
    for (int i = 0; i < 4; ++i) out.push_back({pts[i], static_cast<int>(bi), kinds[i]});
  }
  return out;
}

CalibrationResult calibrate(std::span<const Correspondence> corrs, double inlier_px,
                            std::uint64_t seed, int max_iters) {
  if (corrs.size() < 4) throw Error(ErrorCode::InsufficientData, "calibration needs >= 4 correspondences");
  auto fit = ransac_fit(corrs, RansacParams{inlier_px, max_iters, seed});
  double sum_px = 0.0, sum_mm = 0.0;
  for (std::size_t i : fit.inliers) {
    const double e = reprojection_error(fit.homography, corrs[i]);
    sum_px += e * e;
    const double d = norm(unproject(fit.homography, corrs[i].image) - corrs[i].world);
    sum_mm += d * d;
  }
  const double n = static_cast<double>(fit.inliers.size());
  return {fit.homography, fit.inliers.size(), std::sqrt(sum_px / n), std::sqrt(sum_mm / n),
          std::move(fit.inliers)};
}

CalibrationResult calibrate(std::span<const MarkerCorner> corners, std::span<const WorldPoint> world,
                            std::span<const std::pair<std::size_t, std::size_t>> pairing,
                            double inlier_px, std::uint64_t seed, int max_iters) {
  std::vector<Correspondence> corrs;
  std::vector<bool> used_c(corners.size(), false), used_w(world.size(), false);
  for (const auto& [ci, wi] : pairing) {
    if (ci >= corners.size() || wi >= world.size()) {
      throw Error(ErrorCode::InvalidArgument, "pairing index out of range");
    }
    if (used_c[ci] || used_w[wi]) throw Error(ErrorCode::InvalidArgument, "pairing is not one-to-one");
    used_c[ci] = used_w[wi] = true;
    corrs.push_back({world[wi], corners[ci].image});
  }
  return calibrate(corrs, inlier_px, seed, max_iters);
}

std::vector<Correspondence> snap_to_corners(std::span<const Correspondence> corrs,
                                            std::span<const MarkerCorner> corners, double max_px) {
  std::vector<Correspondence> out;
  for (const auto& c : corrs) {
    const MarkerCorner* best = nullptr;
    double best_d = max_px;
    for (const auto& mc : corners) {
      const double d = norm(mc.image - c.image);
      if (d <= best_d) {
        best_d = d;
        best = &mc;
      }
    }
    if (best) out.push_back({c.world, best->image});
  }
  return out;
}

RasterImage render_ground_map(const RasterImage& frame, const Homography& h, const WorldRect& extent,
                              double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "map scale must be > 0");
  const double wmm = extent.x_max - extent.x_min, hmm = extent.y_max - extent.y_min;
  if (!(wmm > 0.0) || !(hmm > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty map extent");
  const int w = std::max(1, static_cast<int>(std::lround(wmm / scale)));
  const int hgt = std::max(1, static_cast<int>(std::lround(hmm / scale)));
  if (static_cast<long long>(w) * hgt > 100'000'000LL) {
    throw Error(ErrorCode::InvalidArgument, "ground map too large; increase the scale");
  }
  RasterImage out(w, hgt, frame.channels());
  for (int j = 0; j < hgt; ++j) {
    for (int i = 0; i < w; ++i) {
      ImagePoint p;
      try {
        p = project(h, {extent.x_min + i * scale, extent.y_min + j * scale});
      } catch (const Error&) {
        continue;
      }
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      const double rx = std::round(p.x), ry = std::round(p.y);
      if (rx < 0 || ry < 0 || rx >= frame.width() || ry >= frame.height()) continue;
      for (int c = 0; c < frame.channels(); ++c) {
        out.at(i, j, c) = frame.at(static_cast<int>(rx), static_cast<int>(ry), c);
      }
    }
  }
  return out;
}

std::string format_calibration(const CalibrationResult& result) {
  std::string out = "# monolocal-calibration v1\n";
  const auto& e = result.homography.entries();
  char buf[128];
  for (int r = 0; r < 3; ++r) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", e[3 * r], e[3 * r + 1], e[3 * r + 2]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "inliers=%zu rms_px=%.6g\n", result.inliers, result.rms_reproj_px);
  out += buf;
  return out;
}

void write_calibration(const std::filesystem::path& path, const CalibrationResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << format_calibration(result);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

CalibrationResult parse_calibration(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# monolocal-calibration v1", 0) != 0) {
    throw Error(ErrorCode::ParseError, "missing calibration header");
  }
  std::array<double, 9> h{};
  for (int r = 0; r < 3; ++r) {
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "calibration file truncated");
    std::istringstream row(line);
    for (int c = 0; c < 3; ++c) {
      if (!(row >> h[3 * r + c])) {
        throw Error(ErrorCode::ParseError, "bad homography row " + std::to_string(r + 1));
      }
    }
  }
  CalibrationResult result{Homography::from_entries(h), 0, 0.0, 0.0, {}};
  if (std::getline(in, line)) {
    std::size_t inl = 0;
    double rms = 0.0;
    if (std::sscanf(line.c_str(), "inliers=%zu rms_px=%lf", &inl, &rms) == 2) {
      result.inliers = inl;
      result.rms_reproj_px = rms;
    }
  }
  return result;
}

CalibrationResult read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_calibration(buf.str());
}

}  // namespace monolocal
