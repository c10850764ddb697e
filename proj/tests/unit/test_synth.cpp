#include <numbers>

#include "doctest.h"
#include "monolocal/synth.hpp"
#include "test_support.hpp"

using namespace monolocal;
using namespace testsupport;

namespace {

synth::SceneSpec scene_with(const synth::SuitePose& pose, double noise = 0.0) {
  synth::SceneSpec s;
  s.vehicle = synth::SceneVehicle{SpecDatabase::load_default().at("test_vehicle"), pose.center, pose.heading_deg};
  s.pixel_noise_sigma = noise;
  return s;
}

const synth::SuitePose& pose(const std::string& id) {
  static const auto poses = synth::default_poses();
  for (const auto& p : poses)
    if (p.id == id) return p;
  throw std::runtime_error("no pose " + id);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("camera projection agrees with its ground homography") {
    const synth::PinholeCamera cam;
    const auto h = cam.ground_homography();
    for (double x : {-3000.0, 0.0, 2500.0})
      for (double y : {1000.0, 6000.0, 15000.0}) {
        const auto a = cam.project({x, y, 0.0});
        const auto b = project(h, {x, y});
        CHECK(norm(a - b) < 1e-9);
      }
    // straight ahead on the optical axis lands on the principal point
    const double d = 6000.0 / std::tan(30.0 * std::numbers::pi / 180.0);
    const auto c = cam.project({0.0, -6000.0 + d, 0.0});
    CHECK(c.x == doctest::Approx((cam.width - 1) / 2.0));
    CHECK(c.y == doctest::Approx((cam.height - 1) / 2.0));
    try {
      cam.project({0.0, -20000.0, 0.0});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ElementBeyondHorizon);
    }
  }

  TEST_CASE("rendering is deterministic per seed") {
    const auto s = scene_with(pose("M30"), 2.0);
    const auto a = synth::render(s, 5), b = synth::render(s, 5), c = synth::render(s, 6);
    CHECK(a.frame == b.frame);
    CHECK(!(a.frame == c.frame));
    const auto clean = scene_with(pose("M30"));
    CHECK(synth::render(clean, 1).frame == synth::render(clean, 2).frame);
  }

  TEST_CASE("ground truth matches the scene") {
    const auto s = scene_with(pose("C30"));
    const auto r = synth::render(s);
    const auto h = s.camera.ground_homography();
    REQUIRE(r.truth.pose);
    CHECK(r.truth.pose->center == pose("C30").center);
    CHECK(r.truth.pose->heading_deg == doctest::Approx(23.92));
    CHECK(r.truth.marker_corners.size() == 4 * s.markers.size());
    for (const auto& c : r.truth.marker_corners) CHECK(norm(project(h, c.world) - c.image) < 1e-9);
    CHECK(r.truth.plate_visible);
    CHECK(r.truth.anchor_kind == AnchorKind::PlateO);
    CHECK(norm(project(h, r.truth.anchor_world) - r.truth.anchor_image) < 1e-9);
    CHECK(std::abs(r.truth.l_F.signed_distance(r.truth.anchor_image)) < 1e-6);
    // the anchor is the front midpoint: half a length ahead of the centre
    const auto& spec = s.vehicle->spec;
    CHECK(norm(r.truth.anchor_world - pose("C30").center) == doctest::Approx(0.5 * spec.length_mm));
  }

  TEST_CASE("side view hides the plate and anchors on the wheels") {
    const auto r = synth::render(scene_with(pose("S90")));
    CHECK(!r.truth.plate_visible);
    CHECK(r.truth.anchor_kind == AnchorKind::WheelQ);
    CHECK(std::abs(r.truth.l_S.signed_distance(r.truth.anchor_image)) < 1e-6);
  }

  TEST_CASE("colours land where the geometry says") {
    const auto s = scene_with(pose("C0"));
    const auto r = synth::render(s);
    auto px = [&](Point2 p) {
      const int x = int(std::lround(p.x)), y = int(std::lround(p.y));
      return Rgb{r.frame.at(x, y, 0), r.frame.at(x, y, 1), r.frame.at(x, y, 2)};
    };
    // just inside the front line, above the anchor: the plate or the body
    CHECK(px(r.truth.anchor_image + Point2{0, -4}) != s.colors.road);
    CHECK(px(r.truth.anchor_image + Point2{0, 6}) == s.colors.road);
    // the centre of every marker is paint
    for (const auto& m : s.markers) {
      const auto c = project(s.camera.ground_homography(), 0.5 * (m.min + m.max));
      if (r.frame.contains(int(c.x), int(c.y))) CHECK(px(c) == s.colors.marker);
    }
  }

  TEST_CASE("pose table") {
    const auto p = synth::default_poses();
    REQUIRE(p.size() == 7);
    CHECK(p[0].id == "M0");
    CHECK(p[6].heading_deg == 90.0);
  }

  TEST_CASE("noiseless suite is within the tight thresholds") {
    const auto db = SpecDatabase::load_default();
    const auto report = synth::run_suite(synth::SuiteConfig{}, db, 1);
    REQUIRE(report.cases.size() == 7);
    for (const auto& c : report.cases) {
      CAPTURE(c.pose_id);
      CAPTURE(c.detail);
      REQUIRE(c.status == "ok");
      REQUIRE(c.error);
      CHECK(c.error->pos_mm < 20.0);
      CHECK(std::abs(c.error->dangle_deg) < 0.5);
      CHECK(c.passed);
      CHECK(*c.anchor_kind == (c.pose_id == "S90" ? AnchorKind::WheelQ : AnchorKind::PlateO));
    }
    CHECK(report.meets(synth::SuiteThresholds{}));
    CHECK(report.calibration_inliers >= 20);
  }

  TEST_CASE("suite reports are reproducible and well formed") {
    const auto db = SpecDatabase::load_default();
    synth::SuiteConfig cfg;
    cfg.detection_noise_px = 1.0;
    cfg.poses.resize(2);
    const auto a = synth::run_suite(cfg, db, 7), b = synth::run_suite(cfg, db, 7), c = synth::run_suite(cfg, db, 8);
    CHECK(synth::format_csv(a) == synth::format_csv(b));
    CHECK(synth::format_text(a) == synth::format_text(b));
    CHECK(synth::format_csv(a) != synth::format_csv(c));
    const auto csv = synth::format_csv(a);
    CHECK(csv.rfind("pose_id,real_x,real_y,real_angle,est_x,est_y,est_angle,dx,dy,dangle,pos_err,dx_pct,dy_pct,pos_pct", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(synth::format_text(a).find("of 2 cases within thresholds") != std::string::npos);
  }

  TEST_CASE("threshold bookkeeping") {
    synth::SuiteReport r;
    r.cases.resize(6);
    for (int i = 0; i < 5; ++i) r.cases[i].passed = true;
    CHECK(r.passing() == 5);
    CHECK(!r.meets(synth::SuiteThresholds{}));
    synth::SuiteThresholds t;
    t.min_passing = 5;
    CHECK(r.meets(t));
  }
}
