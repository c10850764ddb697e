#include "monolocal/footprint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace monolocal {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

double wrap_pi(double theta) {
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  return theta;
}

// Normal angle of the image line running along `dir`.
double normal_angle_of(Point2 dir) { return wrap_pi(std::atan2(dir.y, dir.x) + kPi / 2.0); }

Point2 unit(Point2 v) {
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : v;
}

// Square dilation by `r` pixels, separable.
RasterImage dilate(const RasterImage& mask, int r) {
  if (r <= 0) return mask;
  const int w = mask.width(), h = mask.height();
  RasterImage tmp(w, h, 1), out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dx = -r; dx <= r && !v; ++dx) {
        const int xx = x + dx;
        if (xx >= 0 && xx < w) v = mask.at(xx, y);
      }
      tmp.at(x, y) = v ? 255 : 0;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dy = -r; dy <= r && !v; ++dy) {
        const int yy = y + dy;
        if (yy >= 0 && yy < h) v = tmp.at(x, yy);
      }
      out.at(x, y) = v ? 255 : 0;
    }
  }
  return out;
}

// Modal 16x16x16 HSV bin, +-1 bin in each axis (hue wraps).
RasterImage body_color_mask(const RasterImage& roi) {
  const RasterImage hsv = to_hsv(roi);
  std::vector<std::uint32_t> hist(16 * 16 * 16, 0);
  auto bin = [](const std::uint8_t* p) {
    return std::array<int, 3>{p[0] * 16 / 180, p[1] / 16, p[2] / 16};
  };
  const auto d = hsv.data();
  for (std::size_t i = 0; i < hsv.pixel_count(); ++i) {
    const auto b = bin(&d[3 * i]);
    ++hist[(b[0] * 16 + b[1]) * 16 + b[2]];
  }
  const auto mode = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
  const int mh = mode / 256, ms = (mode / 16) % 16, mv = mode % 16;
  RasterImage out(roi.width(), roi.height(), 1);
  auto o = out.data();
  for (std::size_t i = 0; i < hsv.pixel_count(); ++i) {
    const auto b = bin(&d[3 * i]);
    const int dh = std::abs(b[0] - mh);
    if (std::min(dh, 16 - dh) <= 1 && std::abs(b[1] - ms) <= 1 && std::abs(b[2] - mv) <= 1) o[i] = 255;
  }
  return out;
}

// Total-least-squares re-fit of a Hough line to the edge pixels near it.
LineRT polish(const LineRT& line, const std::vector<Point2>& edge_pixels) {
  std::vector<Point2> near;
  for (const auto& p : edge_pixels) {
    if (std::abs(line.signed_distance(p)) <= 2.0) near.push_back(p);
  }
  auto fit = fit_line(near);
  if (!fit || line_angle_difference(fit->theta, line.theta) > 3.0 * kDeg) return line;
  fit->votes = line.votes;
  return *fit;
}

bool same_line(const LineRT& a, const LineRT& b) {
  if (line_angle_difference(a.theta, b.theta) > 2.0 * kDeg) return false;
  const double rb = dot(a.normal(), b.normal()) >= 0.0 ? b.rho : -b.rho;
  return std::abs(a.rho - rb) <= 3.0;
}

struct Tangent {
  LineRT line;
  double mean_y = 0.0;
};

// Both tangents of direction `theta` to the mask: {min side, max side}.
std::pair<Tangent, Tangent> tangents(const RasterImage& mask, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double v = c * x + s * y;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double ylo = 0.0, yhi = 0.0;
  int nlo = 0, nhi = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double v = c * x + s * y;
      if (v <= lo + 0.5) {
        ylo += y;
        ++nlo;
      }
      if (v >= hi - 0.5) {
        yhi += y;
        ++nhi;
      }
    }
  }
  return {Tangent{LineRT::from_normal(theta, lo), ylo / std::max(nlo, 1)},
          Tangent{LineRT::from_normal(theta, hi), yhi / std::max(nhi, 1)}};
}

// Side ratio of the blob's equivalent rectangle, from second moments. Unlike the
// bounding box this does not shrink when the plate is seen at a slant.
double principal_aspect(const LabeledBlobs& lb, const Blob& b) {
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
  const double disc = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
  const double l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
  if (l2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(l1 / l2);
}

Point2 mask_centroid(const RasterImage& mask) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::InsufficientData, "empty foreground mask");
  return {sx / n, sy / n};
}

}  // namespace

BodyLines extract_body_lines(const RasterImage& roi, double theta_w, double theta_s,
                             const BodyLineParams& params, const RasterImage* gate) {
  if (roi.channels() != 3) throw Error(ErrorCode::InvalidChannels, "body lines need an RGB ROI");
  if (line_angle_difference(theta_w, theta_s) < 20.0 * kDeg) {
    throw Error(ErrorCode::InvalidArgument, "expected width/side directions closer than 20 degrees");
  }
  if (gate && (gate->width() != roi.width() || gate->height() != roi.height())) {
    throw Error(ErrorCode::DimensionMismatch, "gate mask does not match ROI");
  }
  RasterImage edges = canny(to_grayscale(roi), params.canny);

  if (params.suppress_body_color) {
    const RasterImage body = body_color_mask(roi);
    RasterImage kept = edges;
    for (int y = 0; y < roi.height(); ++y) {
      for (int x = 0; x < roi.width(); ++x) {
        if (!edges.at(x, y)) continue;
        bool interior = true;
        for (int dy = -1; dy <= 1 && interior; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (!body.contains(xx, yy) || !body.at(xx, yy)) {
              interior = false;
              break;
            }
          }
        }
        if (interior) kept.at(x, y) = 0;
      }
    }
    edges = std::move(kept);
  }
  if (gate) {
    const RasterImage g = dilate(*gate, params.gate_dilate_px);
    auto e = edges.data();
    const auto gd = g.data();
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!gd[i]) e[i] = 0;
    }
  }

  std::vector<Point2> edge_pixels;
  for (int y = 0; y < edges.height(); ++y) {
    for (int x = 0; x < edges.width(); ++x) {
      if (edges.at(x, y)) edge_pixels.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }

  std::vector<LineRT> merged;
  for (const auto& raw : hough_lines(edges, params.hough)) {
    const LineRT l = polish(raw, edge_pixels);
    if (std::none_of(merged.begin(), merged.end(), [&](const LineRT& m) { return same_line(m, l); })) {
      merged.push_back(l);
    }
  }

  BodyLines out;
  const double gate_rad = params.gate_deg * kDeg;
  for (const auto& l : merged) {
    if (line_angle_difference(l.theta, theta_w) <= gate_rad) {
      out.width.push_back(l);
    } else if (line_angle_difference(l.theta, theta_s) <= gate_rad) {
      out.side.push_back(l);
    }
  }
  return out;
}

std::pair<double, double> expected_directions(const RasterImage& mask, const Homography& h, Point2 offset,
                                              std::optional<double> width_hint) {
  if (mask.channels() != 1) throw Error(ErrorCode::InvalidChannels, "mask must be single-channel");
  // The lowest foreground pixel of each column usually sits on a ground-contact
  // edge. Raised parts of the body poke below it in a few columns, so the
  // dominant straight run is found robustly rather than by a global fit.
  std::vector<Point2> env;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = mask.height() - 1; y >= 0; --y) {
      if (mask.at(x, y)) {
        env.push_back({static_cast<double>(x), y + 0.5});
        break;
      }
    }
  }
  if (env.size() < 3) throw Error(ErrorCode::InsufficientData, "foreground too small for a direction estimate");

  constexpr double kInlierPx = 1.5;
  const std::size_t stride = std::max<std::size_t>(1, env.size() / 100);
  std::size_t best_count = 0;
  LineRT best;
  for (std::size_t i = 0; i < env.size(); i += stride) {
    for (std::size_t j = i + stride; j < env.size(); j += stride) {
      const LineRT cand = LineRT::through(env[i], env[j] - env[i]);
      std::size_t count = 0;
      for (const auto& p : env) count += std::abs(cand.signed_distance(p)) <= kInlierPx;
      if (count > best_count) {
        best_count = count;
        best = cand;
      }
    }
  }
  std::vector<Point2> inliers;
  for (const auto& p : env) {
    if (std::abs(best.signed_distance(p)) <= kInlierPx) inliers.push_back(p);
  }
  if (inliers.size() >= 2) {
    if (auto fitted = fit_line(inliers)) best = *fitted;
  }

  // Ground direction of that edge, and its perpendicular, seen from the edge's middle.
  Point2 mid{};
  for (const auto& p : inliers) mid = mid + p;
  mid = (1.0 / inliers.size()) * mid;
  mid = best.closest_point(mid);
  const WorldPoint a0 = unproject(h, mid + offset);
  const WorldPoint a1 = unproject(h, mid + 10.0 * best.direction() + offset);
  WorldPoint perp{-(a1.y - a0.y), a1.x - a0.x};
  perp = (500.0 / norm(perp)) * perp;
  const Point2 dp = project(h, a0 + perp) - project(h, a0);
  const double theta_edge = best.theta, theta_other = normal_angle_of(dp);

  bool edge_is_width;
  if (width_hint) {
    edge_is_width = line_angle_difference(theta_edge, *width_hint) <= line_angle_difference(theta_other, *width_hint);
  } else {
    // No plate: the vehicle is assumed to show its side, the longest ground edge.
    edge_is_width = false;
  }
  return edge_is_width ? std::pair{theta_edge, theta_other} : std::pair{theta_other, theta_edge};
}

FootprintLines FootprintLines::translated(Point2 offset) const {
  FootprintLines out = *this;
  out.l_F = l_F.translated(offset);
  out.l_S = l_S.translated(offset);
  out.opp_F = opp_F.translated(offset);
  out.opp_S = opp_S.translated(offset);
  out.centroid = centroid + offset;
  return out;
}

std::optional<std::array<Point2, 4>> FootprintLines::corners() const {
  const auto a = intersect(l_F, l_S), b = intersect(l_F, opp_S);
  const auto c = intersect(opp_F, opp_S), d = intersect(opp_F, l_S);
  if (!a || !b || !c || !d) return std::nullopt;
  return std::array<Point2, 4>{*a, *b, *c, *d};
}

FootprintLines synthesize_footprint_lines(const std::vector<LineRT>& width_lines,
                                          const std::vector<LineRT>& side_lines,
                                          const RasterImage& roi_mask) {
  if (width_lines.empty() || side_lines.empty()) {
    throw Error(ErrorCode::MissingLines, "need at least one width line and one side line");
  }
  if (roi_mask.channels() != 1) throw Error(ErrorCode::InvalidChannels, "mask must be single-channel");
  std::vector<double> tw, ts;
  for (const auto& l : width_lines) tw.push_back(l.theta);
  for (const auto& l : side_lines) ts.push_back(l.theta);
  const double theta_f = circular_mean_pi(tw), theta_s = circular_mean_pi(ts);
  if (line_angle_difference(theta_f, theta_s) < 20.0 * kDeg) {
    throw Error(ErrorCode::DegenerateConfiguration, "width and side lines are closer than 20 degrees");
  }
  FootprintLines out;
  out.centroid = mask_centroid(roi_mask);
  const auto [f_lo, f_hi] = tangents(roi_mask, theta_f);
  const auto [s_lo, s_hi] = tangents(roi_mask, theta_s);
  // The side nearer the camera is lower in the image.
  const bool f_hi_near = f_hi.mean_y >= f_lo.mean_y;
  const bool s_hi_near = s_hi.mean_y >= s_lo.mean_y;
  out.l_F = f_hi_near ? f_hi.line : f_lo.line;
  out.opp_F = f_hi_near ? f_lo.line : f_hi.line;
  out.l_S = s_hi_near ? s_hi.line : s_lo.line;
  out.opp_S = s_hi_near ? s_lo.line : s_hi.line;
  out.support_W = width_lines.size();
  out.support_S = side_lines.size();
  return out;
}

FootprintLines refine_footprint_lines(const FootprintLines& lines, const RasterImage& roi_mask, int passes) {
  const auto boundary = boundary_points(roi_mask);
  FootprintLines cur = lines;
  for (int pass = 0; pass < passes; ++pass) {
    const auto c = cur.corners();
    if (!c) break;
    const double band = pass == 0 ? 8.0 : 2.5;
    LineRT* sides[4] = {&cur.l_F, &cur.opp_S, &cur.opp_F, &cur.l_S};
    const std::array<std::pair<int, int>, 4> ends{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
    std::array<LineRT, 4> refined{*sides[0], *sides[1], *sides[2], *sides[3]};
    for (int i = 0; i < 4; ++i) {
      const Point2 a = (*c)[ends[i].first], b = (*c)[ends[i].second];
      const double margin = 2.0 + 0.08 * norm(b - a);
      if (auto r = refine_segment_to_boundary(*sides[i], a, b, cur.centroid, boundary, band, margin)) {
        refined[i] = *r;
      }
    }
    for (int i = 0; i < 4; ++i) *sides[i] = refined[i];
  }
  return cur;
}

std::optional<PlateDetection> detect_plate(const RasterImage& roi, const PlateParams& params) {
  if (roi.channels() != 3) throw Error(ErrorCode::InvalidChannels, "plate detection needs RGB");
  const RasterImage mask = color_mask(to_hsv(roi), params.band);
  const LabeledBlobs lb = label_components(mask);
  const double roi_area = static_cast<double>(roi.pixel_count());
  const Blob* best = nullptr;
  for (const auto& b : lb.blobs) {
    const double aspect = principal_aspect(lb, b), rel = b.area / roi_area;
    if (aspect < params.min_aspect || aspect > params.max_aspect) continue;
    if (rel < params.min_rel_area || rel > params.max_rel_area) continue;
    if (!best || b.area > best->area) best = &b;
  }
  if (!best) return std::nullopt;

  constexpr int kMargin = 3;
  const int x0 = std::max(0, best->x_min - kMargin), y0 = std::max(0, best->y_min - kMargin);
  const int x1 = std::min(roi.width() - 1, best->x_max + kMargin);
  const int y1 = std::min(roi.height() - 1, best->y_max + kMargin);
  RasterImage blob(x1 - x0 + 1, y1 - y0 + 1, 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (lb.labels.at(x, y) == best->label) blob.at(x - x0, y - y0) = 255;
    }
  }
  const Point2 offset{static_cast<double>(x0), static_cast<double>(y0)};
  const Point2 centroid = best->centroid - offset;
  const int bw = best->x_max - best->x_min + 1;
  const auto lines = hough_lines(canny(blob), HoughParams{1.0, kDeg, std::max(5, bw / 3)});
  const auto boundary = boundary_points(blob);

  std::optional<LineRT> upper, lower;
  for (const auto& l : lines) {
    if (line_angle_difference(l.theta, kPi / 2.0) > 30.0 * kDeg) continue;
    const Point2 at = l.closest_point(centroid);
    if (at.y < centroid.y && !upper) upper = l;
    if (at.y > centroid.y && !lower) lower = l;
  }
  auto finish = [&](std::optional<LineRT> l, double fallback_y, Point2 outward) {
    if (l) {
      if (auto r = refine_line_to_boundary(*l, boundary, 2.0, outward)) l = r;
    } else {
      l = LineRT::from_normal(kPi / 2.0, fallback_y);
    }
    return l->translated(offset);
  };
  PlateDetection det{
      finish(upper, best->y_min - 0.5 - y0, {0.0, -1.0}),
      finish(lower, best->y_max + 0.5 - y0, {0.0, 1.0}),
      best->centroid,
      RoiBox{best->x_min, best->y_min, bw, best->y_max - best->y_min + 1},
  };
  return det;
}

std::optional<WheelDetection> detect_wheels(const RasterImage& roi, const LineRT& l_S,
                                            const WheelParams& params) {
  if (roi.channels() != 3) throw Error(ErrorCode::InvalidChannels, "wheel detection needs RGB");
  const double band = params.band_rel_height * roi.height();
  RasterImage dark(roi.width(), roi.height(), 1);
  for (int y = 0; y < roi.height(); ++y) {
    for (int x = 0; x < roi.width(); ++x) {
      const int v = std::max({roi.at(x, y, 0), roi.at(x, y, 1), roi.at(x, y, 2)});
      if (v <= params.dark_v_max && std::abs(l_S.signed_distance({double(x), double(y)})) <= band) {
        dark.at(x, y) = 255;
      }
    }
  }
  const LabeledBlobs lb = label_components(dark);
  std::vector<ImagePoint> contacts;
  for (const auto& b : lb.blobs) {
    if (b.area < params.min_area) continue;
    const double bw = b.x_max - b.x_min + 1, bh = b.y_max - b.y_min + 1;
    const double fill = b.area / (kPi / 4.0 * bw * bh);
    const double aspect = bw / bh;
    if (fill < params.min_fill || aspect < params.min_aspect || aspect > params.max_aspect) continue;
    double sx = 0.0;
    int n = 0;
    for (int x = b.x_min; x <= b.x_max; ++x) {
      if (lb.labels.at(x, b.y_max) == b.label) {
        sx += x;
        ++n;
      }
    }
    contacts.push_back(l_S.closest_point({sx / n, static_cast<double>(b.y_max)}));
  }
  if (contacts.size() < 2) return std::nullopt;
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    for (std::size_t j = i + 1; j < contacts.size(); ++j) {
      const double d = norm(contacts[i] - contacts[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  ImagePoint a = contacts[bi], b = contacts[bj];
  if (b.x < a.x) std::swap(a, b);
  return WheelDetection{{a, b}, 0.5 * (a + b)};
}

std::string_view to_string(AnchorKind k) { return k == AnchorKind::PlateO ? "plate_O" : "wheel_Q"; }

FootprintKeys FootprintKeys::translated(Point2 offset) const {
  return {anchor + offset, C + offset, anchor_kind, lines.translated(offset)};
}

std::string_view to_string(KeyOrientation o) {
  switch (o) {
    case KeyOrientation::ImageParallel: return "image_parallel";
    case KeyOrientation::VanishingPoint: return "vanishing_point";
    case KeyOrientation::GroundNormal: return "ground_normal";
  }
  return "unknown";
}

KeyOrientation parse_key_orientation(std::string_view s) {
  for (auto o : {KeyOrientation::ImageParallel, KeyOrientation::VanishingPoint, KeyOrientation::GroundNormal}) {
    if (s == to_string(o)) return o;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown key orientation '" + std::string(s) + "'");
}

FootprintKeys select_keys(const FootprintLines& lines, const std::optional<PlateDetection>& plate,
                          const std::optional<WheelDetection>& wheels, double c_dist_px,
                          KeyOrientation orientation, const Homography* ground) {
  if (!(c_dist_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "c_dist_px must be > 0");
  if (!plate && !wheels) throw Error(ErrorCode::NoAnchor, "neither plate nor wheels detected");

  FootprintKeys keys;
  keys.lines = lines;
  if (orientation == KeyOrientation::GroundNormal && !ground) {
    throw Error(ErrorCode::InvalidArgument, "ground_normal orientation needs a homography");
  }
  const LineRT* near = nullptr;
  const LineRT* far = nullptr;
  const LineRT* base = nullptr;
  if (plate) {
    keys.anchor_kind = AnchorKind::PlateO;
    const auto drop = intersect(LineRT::from_normal(0.0, plate->P.x), lines.l_F);
    keys.anchor = drop ? *drop : lines.l_F.closest_point(plate->P);
    near = &lines.l_S;
    far = &lines.opp_S;
    base = &lines.l_F;
  } else {
    keys.anchor_kind = AnchorKind::WheelQ;
    keys.anchor = wheels->Q;
    near = &lines.l_F;
    far = &lines.opp_F;
    base = &lines.l_S;
  }

  Point2 dir = near->direction();
  if (orientation == KeyOrientation::VanishingPoint) {
    if (const auto vp = intersect(*near, *far)) {
      const Point2 to_vp = *vp - keys.anchor;
      if (norm(to_vp) > 1e-9) dir = unit(to_vp);
    }
  } else if (orientation == KeyOrientation::GroundNormal) {
    try {
      const WorldPoint a = unproject(*ground, keys.anchor);
      const WorldPoint along = unproject(*ground, keys.anchor + 50.0 * base->direction()) - a;
      const WorldPoint n = (100.0 / norm(along)) * WorldPoint{-along.y, along.x};
      // Try both senses: one of them may cross the horizon.
      for (double sgn : {1.0, -1.0}) {
        const WorldPoint target = a + sgn * n;
        const Point2 step = project(*ground, target) - keys.anchor;
        if (norm(step) > 1e-9 && dot(step, step) < 1e12) {
          dir = sgn * unit(step);
          break;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PointAtInfinity) throw;
      throw Error(ErrorCode::AnchorBeyondHorizon, "anchor lies on or beyond the horizon");
    }
  }
  if (dot(dir, lines.centroid - keys.anchor) < 0.0) dir = -1.0 * dir;
  keys.C = keys.anchor + c_dist_px * dir;
  return keys;
}

}  // namespace monolocal
