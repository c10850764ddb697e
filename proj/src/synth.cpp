#include "monolocal/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "monolocal/random.hpp"

namespace monolocal::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

using Polygon = std::vector<ImagePoint>;

bool inside(const Polygon& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const ImagePoint a = poly[i], b = poly[j];
    if ((a.y > y) != (b.y > y)) {
      const double xc = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (x < xc) in = !in;
    }
  }
  return in;
}

void paint(RasterImage& img, Rgb c, int x, int y) {
  img.at(x, y, 0) = c.r;
  img.at(x, y, 1) = c.g;
  img.at(x, y, 2) = c.b;
}

void fill_polygon(RasterImage& img, const Polygon& poly, Rgb c) {
  double x0 = poly[0].x, x1 = x0, y0 = poly[0].y, y1 = y0;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int xa = std::max(0, static_cast<int>(std::ceil(x0)));
  const int xb = std::min(img.width() - 1, static_cast<int>(std::floor(x1)));
  const int ya = std::max(0, static_cast<int>(std::ceil(y0)));
  const int yb = std::min(img.height() - 1, static_cast<int>(std::floor(y1)));
  for (int y = ya; y <= yb; ++y) {
    for (int x = xa; x <= xb; ++x) {
      if (inside(poly, x, y)) paint(img, c, x, y);
    }
  }
}

// Ellipse with semi-axis `a` along unit `t` and `b` along the perpendicular.
void fill_ellipse(RasterImage& img, ImagePoint center, Point2 t, double a, double b, Rgb c) {
  const Point2 n{-t.y, t.x};
  const double r = std::max(a, b);
  const int xa = std::max(0, static_cast<int>(std::ceil(center.x - r)));
  const int xb = std::min(img.width() - 1, static_cast<int>(std::floor(center.x + r)));
  const int ya = std::max(0, static_cast<int>(std::ceil(center.y - r)));
  const int yb = std::min(img.height() - 1, static_cast<int>(std::floor(center.y + r)));
  for (int y = ya; y <= yb; ++y) {
    for (int x = xa; x <= xb; ++x) {
      const Point2 d = Point2{double(x), double(y)} - center;
      const double u = dot(d, t) / a, v = dot(d, n) / b;
      if (u * u + v * v <= 1.0) paint(img, c, x, y);
    }
  }
}

Point3 lift(WorldPoint p, double z = 0.0) { return {p.x, p.y, z}; }

Point2 unit(Point2 v) { return (1.0 / norm(v)) * v; }

}  // namespace

Eigen::Matrix<double, 3, 4> PinholeCamera::projection() const {
  const double p = pitch_deg * kDeg;
  Eigen::Matrix3d r;
  r.row(0) << 1.0, 0.0, 0.0;
  r.row(1) << 0.0, -std::sin(p), -std::cos(p);
  r.row(2) << 0.0, std::cos(p), -std::sin(p);
  Eigen::Matrix3d k;
  k << focal_px, 0.0, (width - 1) / 2.0, 0.0, focal_px, (height - 1) / 2.0, 0.0, 0.0, 1.0;
  const Eigen::Vector3d c(position.x, position.y, position.z);
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = r;
  rt.col(3) = -r * c;
  return k * rt;
}

Homography PinholeCamera::ground_homography() const {
  const auto p = projection();
  Eigen::Matrix3d h;
  h.col(0) = p.col(0);
  h.col(1) = p.col(1);
  h.col(2) = p.col(3);
  return Homography::from_matrix(h);
}

ImagePoint PinholeCamera::project(const Point3& pt) const {
  const Eigen::Vector3d v = projection() * Eigen::Vector4d(pt.x, pt.y, pt.z, 1.0);
  if (!(v.z() > 1e-9)) throw Error(ErrorCode::ElementBeyondHorizon, "scene element is behind the camera");
  return {v.x() / v.z(), v.y() / v.z()};
}

std::vector<MarkerRect> default_markers() {
  std::vector<MarkerRect> out;
  for (double x : {-3500.0, 3500.0}) {
    for (double y : {1000.0, 6000.0, 11000.0}) {
      out.push_back({{x - 100.0, y}, {x + 100.0, y + 3000.0}});
    }
  }
  return out;
}

Rendered render(const SceneSpec& scene, std::uint64_t seed) {
  const PinholeCamera& cam = scene.camera;
  Rendered out;
  out.frame = RasterImage(cam.width, cam.height, 3);
  RasterImage& img = out.frame;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) paint(img, scene.colors.road, x, y);
  }

  auto project_all = [&](std::initializer_list<Point3> pts) {
    Polygon poly;
    for (const auto& p : pts) poly.push_back(cam.project(p));
    return poly;
  };

  for (const auto& m : scene.markers) {
    const std::array<WorldPoint, 4> wc{WorldPoint{m.min.x, m.min.y}, WorldPoint{m.max.x, m.min.y},
                                       WorldPoint{m.max.x, m.max.y}, WorldPoint{m.min.x, m.max.y}};
    Polygon poly;
    for (const auto& w : wc) {
      poly.push_back(cam.project(lift(w)));
      out.truth.marker_corners.push_back({w, poly.back()});
    }
    fill_polygon(img, poly, scene.colors.marker);
  }

  if (scene.vehicle) {
    const SceneVehicle& v = *scene.vehicle;
    const double h = v.heading_deg * kDeg;
    const WorldPoint axis{std::sin(h), std::cos(h)};  // toward the rear
    // FL, RL, RR, FR
    const auto fp = box_corners(v.center, axis, v.spec.length_mm, v.spec.width_mm);
    const double top = v.spec.height_mm;
    const WorldPoint cam_ground{cam.position.x, cam.position.y};

    struct Face {
      int a, b;  // footprint corner indices, bottom edge a -> b
    };
    const std::array<Face, 4> faces{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};  // left, rear, right, front
    auto outward = [&](const Face& f) {
      const WorldPoint mid = 0.5 * (fp[f.a] + fp[f.b]);
      const WorldPoint n = mid - v.center;
      return (1.0 / norm(n)) * n;
    };
    auto facing = [&](const Face& f) {
      const WorldPoint mid = 0.5 * (fp[f.a] + fp[f.b]);
      return dot(outward(f), cam_ground - mid);
    };

    fill_polygon(img, project_all({lift(fp[0], top), lift(fp[1], top), lift(fp[2], top), lift(fp[3], top)}),
                 scene.colors.body);
    for (const auto& f : faces) {
      if (facing(f) <= 0.0) continue;
      fill_polygon(img, project_all({lift(fp[f.a]), lift(fp[f.b]), lift(fp[f.b], top), lift(fp[f.a], top)}),
                   scene.colors.body);
    }

    GroundTruth& gt = out.truth;
    gt.pose = GroundPose{v.center, normalize_heading_deg(v.heading_deg)};

    const Face& front = faces[3];
    const Face& near_side = facing(faces[0]) >= facing(faces[2]) ? faces[0] : faces[2];
    gt.l_F = LineRT::through(cam.project(lift(fp[front.a])),
                             cam.project(lift(fp[front.b])) - cam.project(lift(fp[front.a])));
    gt.l_S = LineRT::through(cam.project(lift(fp[near_side.a])),
                             cam.project(lift(fp[near_side.b])) - cam.project(lift(fp[near_side.a])));

    const WorldPoint o_world = 0.5 * (fp[front.a] + fp[front.b]);
    const WorldPoint near_mid = 0.5 * (fp[near_side.a] + fp[near_side.b]);
    gt.plate_visible = facing(front) > 0.0 && facing(front) >= facing(near_side);

    if (gt.plate_visible) {
      // The plate is drawn straight above the front-line midpoint in the image, so the
      // vertical drop from its centre lands exactly on O.
      const WorldPoint left = (1.0 / norm(fp[front.b] - fp[front.a])) * (fp[front.b] - fp[front.a]);
      const double hw = 0.5 * scene.plate_width_mm, hh = 0.5 * scene.plate_height_mm;
      const double zc = scene.plate_center_z_mm;
      Polygon plate = project_all({lift(o_world - hw * left, zc - hh), lift(o_world + hw * left, zc - hh),
                                   lift(o_world + hw * left, zc + hh), lift(o_world - hw * left, zc + hh)});
      const double shift = cam.project(lift(o_world)).x - cam.project(lift(o_world, zc)).x;
      for (auto& p : plate) p.x += shift;
      fill_polygon(img, plate, scene.colors.plate);
      gt.anchor_kind = AnchorKind::PlateO;
      gt.anchor_world = o_world;
    } else {
      gt.anchor_kind = AnchorKind::WheelQ;
      gt.anchor_world = near_mid;
    }
    gt.anchor_image = cam.project(lift(gt.anchor_world));

    if (facing(near_side) > 0.0) {
      const WorldPoint along = (1.0 / norm(fp[near_side.b] - fp[near_side.a])) * (fp[near_side.b] - fp[near_side.a]);
      const ImagePoint s0 = cam.project(lift(fp[near_side.a])), s1 = cam.project(lift(fp[near_side.b]));
      const Point2 t = unit(s1 - s0);
      Point2 up{-t.y, t.x};
      if (up.y > 0.0) up = -1.0 * up;
      for (double sgn : {-1.0, 1.0}) {
        const WorldPoint contact = near_mid + (sgn * 0.5 * v.spec.wheelbase_mm) * along;
        const ImagePoint c = cam.project(lift(contact));
        const double a = norm(cam.project(lift(contact + scene.wheel_radius_mm * along)) - c);
        const double b = 0.9 * a;
        fill_ellipse(img, c + b * up, t, a, b, scene.colors.wheel);
      }
    }
  }

  if (scene.pixel_noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    for (auto& px : img.data()) {
      const double v = px + scene.pixel_noise_sigma * standard_normal(rng);
      px = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

std::vector<SuitePose> default_poses() {
  return {
      {"M0", {404.0, 10530.0}, -3.76},   {"M30", {456.0, 9706.0}, 16.95},
      {"M-30", {76.0, 11087.0}, -32.71}, {"C0", {194.0, 4060.0}, -2.07},
      {"C30", {548.0, 4147.0}, 23.92},   {"C-30", {-181.0, 3958.0}, -26.30},
      {"S90", {0.0, 7000.0}, 90.0},
  };
}

std::size_t SuiteReport::passing() const {
  return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const SuiteCase& c) { return c.passed; }));
}

bool SuiteReport::meets(const SuiteThresholds& t) const {
  return passing() >= t.min_passing.value_or(cases.size());
}

SuiteReport run_suite(const SuiteConfig& config, const SpecDatabase& db, std::uint64_t seed) {
  const VehicleSpec& spec = db.at(config.model_id);
  std::mt19937_64 rng(seed);
  SuiteReport report;
  report.seed = seed;
  report.detection_noise_px = config.detection_noise_px;

  SceneSpec base;
  base.camera = config.camera;
  base.pixel_noise_sigma = config.pixel_noise_sigma;
  const Rendered background = render(base, rng());

  // Calibrate from detected marker corners paired with the known world layout.
  const auto detected = detect_marker_corners(background.frame);
  auto corrs = snap_to_corners(background.truth.marker_corners, detected, config.corner_match_px);
  if (config.detection_noise_px > 0.0) {
    for (auto& c : corrs) {
      c.image.x += config.detection_noise_px * standard_normal(rng);
      c.image.y += config.detection_noise_px * standard_normal(rng);
    }
  }
  const std::uint64_t ransac_seed = rng();
  std::optional<CalibrationResult> fitted;
  try {
    fitted = calibrate(corrs, config.calibration_inlier_px, ransac_seed);
  } catch (const Error& e) {
    for (const auto& p : config.poses) {
      report.cases.push_back({p.id, {p.center, normalize_heading_deg(p.heading_deg)}, "calibration_error",
                              e.what(), {}, {}, {}, false});
    }
    return report;
  }
  const CalibrationResult& calib = *fitted;
  report.calibration_inliers = calib.inliers;
  report.calibration_rms_px = calib.rms_reproj_px;

  const RasterImage bg_frame = background.frame;
  const BackgroundModel bg_model = bootstrap(std::span<const RasterImage>(&bg_frame, 1), config.pipeline.background);
  MockClassifier classifier(db, seed);

  for (const auto& p : config.poses) {
    SuiteCase sc;
    sc.pose_id = p.id;
    sc.real = {p.center, normalize_heading_deg(p.heading_deg)};
    std::mt19937_64 case_rng(rng());
    SceneSpec scene = base;
    scene.vehicle = SceneVehicle{spec, p.center, p.heading_deg};
    try {
      const Rendered r = render(scene, case_rng());
      BackgroundModel model = bg_model;
      RasterImage fg = model.segment(r.frame);
      if (config.pipeline.remove_shadows) fg = remove_shadow(r.frame, fg, model);
      const DetectionNoise noise{config.detection_noise_px, &case_rng};
      const FrameResult fr = locate_vehicle(r.frame, fg, calib.homography, db, classifier, config.pipeline,
                                            ClassifyContext{config.model_id, 0}, noise);
      sc.status = std::string(to_string(fr.status));
      sc.detail = fr.detail;
      if (fr.pose) {
        sc.est = GroundPose{fr.pose->center, fr.pose->heading_deg};
        sc.error = pose_error(sc.real, *sc.est, spec);
        sc.anchor_kind = fr.pose->anchor_kind;
        const auto& t = config.thresholds;
        sc.passed = sc.error->pos_mm <= t.max_pos_mm && sc.error->pos_pct <= t.max_pos_pct &&
                    std::abs(sc.error->dangle_deg) <= t.max_angle_deg;
      }
    } catch (const Error& e) {
      sc.status = "error";
      sc.detail = e.what();
    }
    report.cases.push_back(std::move(sc));
  }
  return report;
}

namespace {

std::string fmt(const char* f, double v) {
  if (std::abs(v) < 5e-4) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string format_csv(const SuiteReport& report) {
  std::string out =
      "pose_id,real_x,real_y,real_angle,est_x,est_y,est_angle,dx,dy,dangle,pos_err,dx_pct,dy_pct,pos_pct,anchor,"
      "status\n";
  for (const auto& c : report.cases) {
    out += c.pose_id + "," + fmt("%.3f", c.real.center.x) + "," + fmt("%.3f", c.real.center.y) + "," +
           fmt("%.3f", c.real.heading_deg);
    if (c.est && c.error) {
      const auto& e = *c.error;
      out += "," + fmt("%.3f", c.est->center.x) + "," + fmt("%.3f", c.est->center.y) + "," +
             fmt("%.3f", c.est->heading_deg) + "," + fmt("%.3f", e.dx_mm) + "," + fmt("%.3f", e.dy_mm) + "," +
             fmt("%.3f", e.dangle_deg) + "," + fmt("%.3f", e.pos_mm) + "," + fmt("%.3f", e.dx_pct) + "," +
             fmt("%.3f", e.dy_pct) + "," + fmt("%.3f", e.pos_pct) + "," + std::string(to_string(*c.anchor_kind));
    } else {
      out += ",,,,,,,,,,,";
    }
    out += "," + c.status + "\n";
  }
  return out;
}

std::string format_text(const SuiteReport& report) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "seed %llu  detection noise %.2f px  calibration %zu inliers, rms %.3f px\n\n",
                static_cast<unsigned long long>(report.seed), report.detection_noise_px, report.calibration_inliers,
                report.calibration_rms_px);
  out += line;
  std::snprintf(line, sizeof line, "%-6s | %8s %8s %7s | %8s %8s %7s | %7s %7s %6s %7s | %6s %6s %6s | %s\n", "pose",
                "real_x", "real_y", "angle", "est_x", "est_y", "angle", "dx", "dy", "dang", "pos", "dx%", "dy%",
                "pos%", "anchor");
  out += line;
  out += std::string(126, '-') + "\n";
  for (const auto& c : report.cases) {
    if (!c.est || !c.error) {
      std::snprintf(line, sizeof line, "%-6s | %8.0f %8.0f %7.2f | %s %s\n", c.pose_id.c_str(), c.real.center.x,
                    c.real.center.y, c.real.heading_deg, c.status.c_str(), c.detail.c_str());
      out += line;
      continue;
    }
    const auto& e = *c.error;
    std::snprintf(line, sizeof line,
                  "%-6s | %8.0f %8.0f %7.2f | %8.0f %8.0f %7.2f | %7.0f %7.0f %6.2f %7.2f | %6.2f %6.2f %6.2f | %s%s\n",
                  c.pose_id.c_str(), c.real.center.x, c.real.center.y, c.real.heading_deg, c.est->center.x,
                  c.est->center.y, c.est->heading_deg, e.dx_mm + 0.0, e.dy_mm + 0.0, e.dangle_deg, e.pos_mm,
                  e.dx_pct, e.dy_pct, e.pos_pct, std::string(to_string(*c.anchor_kind)).c_str(),
                  c.passed ? "" : "  FAIL");
    out += line;
  }
  std::snprintf(line, sizeof line, "\n%zu of %zu cases within thresholds\n", report.passing(), report.cases.size());
  out += line;
  return out;
}

}  // namespace monolocal::synth
