#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "monolocal/footprint.hpp"
#include "monolocal/synth.hpp"
#include "test_support.hpp"

using namespace monolocal;
using namespace testsupport;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

const Rgb kGround{100, 100, 100};
const Rgb kBody{170, 40, 40};
const Rgb kPlate{30, 60, 200};
const Rgb kTyre{20, 20, 20};

bool has_line(const std::vector<LineRT>& lines, double rho, double theta, double deg_tol, double px_tol) {
  for (const auto& l : lines) {
    if (within_cell(l.rho, l.theta, rho, theta, px_tol, deg_tol * kDeg)) return true;
  }
  return false;
}

void fill_ellipse(RasterImage& img, Point2 c, double a, double b, Rgb col) {
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double u = (x - c.x) / a, v = (y - c.y) / b;
      if (u * u + v * v <= 1.0) {
        img.at(x, y, 0) = col.r, img.at(x, y, 1) = col.g, img.at(x, y, 2) = col.b;
      }
    }
}

FootprintLines axis_lines(double bottom_y, double side_x) {
  FootprintLines f;
  f.l_F = LineRT::from_normal(kPi / 2, bottom_y);
  f.opp_F = LineRT::from_normal(kPi / 2, bottom_y - 100);
  f.l_S = LineRT::from_normal(0.0, side_x);
  f.opp_S = LineRT::from_normal(0.0, side_x - 200);
  f.centroid = {side_x - 100, bottom_y - 50};
  return f;
}

PlateDetection plate_at(Point2 p) {
  return {LineRT::from_normal(kPi / 2, p.y - 5), LineRT::from_normal(kPi / 2, p.y + 5), p, RoiBox{}};
}

}  // namespace

TEST_SUITE("footprint") {
  TEST_CASE("body lines on a rendered box") {
    auto roi = solid(200, 150, kGround);
    const double t = std::tan(5 * kDeg);
    fill_convex(roi, {{40, 120}, {160, 120}, {160 + 90 * t, 30}, {40 + 90 * t, 30}}, kBody);
    BodyLineParams p;
    p.suppress_body_color = false;
    const auto lines = extract_body_lines(roi, 90 * kDeg, 5 * kDeg, p);
    CHECK(has_line(lines.width, 120, kPi / 2, 1.0, 2.0));
    CHECK(has_line(lines.width, 30, kPi / 2, 1.0, 2.0));
    CHECK(has_line(lines.side, 40 * std::cos(5 * kDeg) + 120 * std::sin(5 * kDeg), 5 * kDeg, 1.0, 2.0));
    CHECK(has_line(lines.side, 160 * std::cos(5 * kDeg) + 120 * std::sin(5 * kDeg), 5 * kDeg, 1.0, 2.0));
    for (const auto& l : lines.width) CHECK(line_angle_difference(l.theta, kPi / 2) <= 15 * kDeg);
    for (const auto& l : lines.side) CHECK(line_angle_difference(l.theta, 5 * kDeg) <= 15 * kDeg);
  }

  TEST_CASE("body lines: blank ROI and off-gate diagonal") {
    const auto blank = extract_body_lines(solid(120, 90, kGround), kPi / 2, 0.0);
    CHECK(blank.width.empty());
    CHECK(blank.side.empty());
    auto roi = solid(120, 120, kGround);
    for (int i = 5; i < 115; ++i)
      for (int d = -1; d <= 1; ++d) roi.at(i, std::clamp(i + d, 0, 119), 0) = 250, roi.at(i, std::clamp(i + d, 0, 119), 1) = 250,
                                    roi.at(i, std::clamp(i + d, 0, 119), 2) = 250;
    const auto diag = extract_body_lines(roi, kPi / 2, 0.0);
    CHECK(diag.width.empty());
    CHECK(diag.side.empty());
    CHECK_THROWS_AS(extract_body_lines(roi, kPi / 2, kPi / 2 - 0.1), Error);
  }

  TEST_CASE("synthesize: mean of 88 and 92 degrees, tangent at the bottom row") {
    RasterImage mask(400, 300, 1);
    fill_rect(mask, 100, 100, 201, 111, Rgb{255, 255, 255});  // rows 100..210
    const auto f = synthesize_footprint_lines({LineRT::from_normal(88 * kDeg, 150), LineRT::from_normal(92 * kDeg, 160)},
                                              {LineRT::from_normal(0.0, 120)}, mask);
    CHECK(f.l_F.theta == doctest::Approx(kPi / 2));
    CHECK(f.l_F.rho == doctest::Approx(210.0));
    CHECK(f.opp_F.rho == doctest::Approx(100.0));
    CHECK(f.support_W == 2);
    CHECK(f.support_S == 1);
  }

  TEST_CASE("synthesize: a single line is translated to tangency") {
    RasterImage mask(300, 300, 1);
    fill_convex(mask, {{60, 220}, {230, 250}, {250, 120}, {90, 80}}, Rgb{255, 255, 255});
    const LineRT w = LineRT::from_normal(1.4, 10.0), s = LineRT::from_normal(0.2, 30.0);
    const auto f = synthesize_footprint_lines({w}, {s}, mask);
    CHECK(f.l_F.theta == doctest::Approx(w.theta));
    CHECK(f.l_S.theta == doctest::Approx(s.theta));
    double hi = -1e300;
    for (int y = 0; y < 300; ++y)
      for (int x = 0; x < 300; ++x)
        if (mask.at(x, y)) hi = std::max(hi, w.signed_distance({double(x), double(y)}) + w.rho);
    CHECK((std::abs(f.l_F.rho - hi) < 1e-9 || std::abs(f.opp_F.rho - hi) < 1e-9));
  }

  TEST_CASE("synthesized tangents never cut the blob") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
      RasterImage mask(160, 120, 1);
      const Point2 c{80 + 20 * (u(rng) - 0.5), 60 + 20 * (u(rng) - 0.5)};
      std::vector<Point2> poly;
      for (int k = 0; k < 5; ++k) {
        const double a = 2 * kPi * (k + 0.8 * u(rng)) / 5, r = 20 + 30 * u(rng);
        poly.push_back(c + Point2{r * std::cos(a), r * std::sin(a)});
      }
      fill_convex(mask, poly, Rgb{255, 255, 255});
      if (count_nonzero(mask) < 20) continue;
      const double tw = kPi / 2 + 0.4 * (u(rng) - 0.5), ts = 0.5 * (u(rng) - 0.5);
      const auto f = synthesize_footprint_lines({LineRT::from_normal(tw, 0)}, {LineRT::from_normal(std::fmod(ts + kPi, kPi), 0)}, mask);
      for (const LineRT* l : {&f.l_F, &f.l_S, &f.opp_F, &f.opp_S}) {
        const double side = l->signed_distance(f.centroid) > 0 ? 1.0 : -1.0;
        for (int y = 0; y < 120; ++y)
          for (int x = 0; x < 160; ++x)
            if (mask.at(x, y)) REQUIRE(side * l->signed_distance({double(x), double(y)}) >= -0.5);
      }
      // the near width tangent is the lower one in the image
      CHECK(f.l_F.closest_point(f.centroid).y >= f.opp_F.closest_point(f.centroid).y - 1e-9);
    }
  }

  TEST_CASE("synthesize failure modes") {
    RasterImage mask(50, 50, 1);
    fill_rect(mask, 10, 10, 20, 20, Rgb{255, 255, 255});
    try {
      synthesize_footprint_lines({}, {LineRT::from_normal(0, 1)}, mask);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingLines);
    }
    CHECK_THROWS_AS(synthesize_footprint_lines({LineRT::from_normal(1.0, 1)}, {LineRT::from_normal(1.2, 1)}, mask), Error);
  }

  TEST_CASE("plate detection") {
    auto roi = solid(300, 200, kGround);
    fill_rect(roi, 60, 40, 180, 120, kBody);
    fill_rect(roi, 120, 110, 60, 15, kPlate);
    const auto p = detect_plate(roi);
    REQUIRE(p);
    CHECK(norm(p->P - Point2{149.5, 117}) <= 2.0);
    CHECK(line_angle_difference(p->upper.theta, kPi / 2) <= 1 * kDeg);
    CHECK(line_angle_difference(p->lower.theta, kPi / 2) <= 1 * kDeg);
    CHECK(p->upper.closest_point(p->P).y < p->P.y);
    CHECK(p->lower.closest_point(p->P).y > p->P.y);
    CHECK(p->bbox == RoiBox{120, 110, 60, 15});

    CHECK(!detect_plate(solid(300, 200, kBody)));

    auto two = solid(300, 200, kGround);
    fill_rect(two, 30, 30, 30, 30, kPlate);
    fill_rect(two, 150, 120, 60, 15, kPlate);
    const auto q = detect_plate(two);
    REQUIRE(q);
    CHECK(q->bbox.x == 150);
  }

  TEST_CASE("wheel contacts and Q") {
    auto roi = solid(500, 400, kGround);
    fill_rect(roi, 60, 120, 400, 80, kBody);
    const LineRT l_S = LineRT::from_normal(kPi / 2, 200);
    fill_ellipse(roi, {120, 175}, 27, 25, kTyre);
    fill_ellipse(roi, {380, 175}, 27, 25, kTyre);
    const auto w = detect_wheels(roi, l_S);
    REQUIRE(w);
    CHECK(norm(w->Q - Point2{250, 200}) <= 1.0);

    CHECK(!detect_wheels(solid(500, 400, kGround), l_S));

    roi = solid(500, 400, kGround);
    fill_rect(roi, 60, 120, 400, 80, kBody);
    fill_ellipse(roi, {250, 175}, 27, 25, kTyre);
    fill_ellipse(roi, {100, 175}, 27, 25, kTyre);
    fill_ellipse(roi, {400, 175}, 27, 25, kTyre);
    const auto three = detect_wheels(roi, l_S);
    REQUIRE(three);
    REQUIRE(three->contacts.size() == 2);
    CHECK(three->contacts[0].x == doctest::Approx(100).epsilon(0.01));
    CHECK(three->contacts[1].x == doctest::Approx(400).epsilon(0.01));
    CHECK(three->Q.x == doctest::Approx(250).epsilon(0.01));
  }

  TEST_CASE("select_keys: plate path") {
    // l_S runs along image x, l_F crosses it at (200, 240)
    FootprintLines f;
    f.l_F = LineRT::through({200, 240}, {1, 1});
    f.l_S = LineRT::from_normal(kPi / 2, 240);
    f.opp_S = LineRT::from_normal(kPi / 2, 140);
    f.opp_F = LineRT::through({500, 240}, {1, 1});
    f.centroid = {350, 200};
    const auto k = select_keys(f, plate_at({200, 150}), std::nullopt, 100.0, KeyOrientation::ImageParallel);
    CHECK(k.anchor_kind == AnchorKind::PlateO);
    CHECK(k.anchor.x == doctest::Approx(200));
    CHECK(k.anchor.y == doctest::Approx(240));
    CHECK(k.C.x == doctest::Approx(300));
    CHECK(k.C.y == doctest::Approx(240));
  }

  TEST_CASE("select_keys: wheel path and priority") {
    FootprintLines f;
    f.l_F = LineRT::from_normal(kPi / 2, 260);
    f.opp_F = LineRT::from_normal(kPi / 2, 160);
    f.l_S = LineRT::from_normal(0.3, 200);
    f.opp_S = LineRT::from_normal(0.3, 50);
    f.centroid = {320, 220};
    const WheelDetection w{{{150, 260}, {350, 260}}, {250, 260}};
    const auto k = select_keys(f, std::nullopt, w, 100.0, KeyOrientation::ImageParallel);
    CHECK(k.anchor_kind == AnchorKind::WheelQ);
    CHECK(k.anchor == Point2{250, 260});
    CHECK(k.C.x == doctest::Approx(350));
    CHECK(k.C.y == doctest::Approx(260));

    const auto both = select_keys(axis_lines(240, 300), plate_at({250, 200}), w, 100.0, KeyOrientation::ImageParallel);
    CHECK(both.anchor_kind == AnchorKind::PlateO);

    try {
      select_keys(f, std::nullopt, std::nullopt);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoAnchor);
    }
    CHECK_THROWS_AS(select_keys(f, std::nullopt, w, 0.0), Error);
    CHECK_THROWS_AS(select_keys(f, std::nullopt, w, 100.0, KeyOrientation::GroundNormal, nullptr), Error);
  }

  TEST_CASE("|anchor - C| equals c_dist and the direction does not depend on it") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto ground = synth::PinholeCamera{}.ground_homography();
    for (int t = 0; t < 200; ++t) {
      FootprintLines f;
      f.l_F = LineRT::from_normal(kPi / 2 + 0.5 * (u(rng) - 0.5), 300 + 100 * u(rng));
      f.opp_F = f.l_F.translated({0, -80});
      f.l_S = LineRT::from_normal(std::fmod(0.6 * (u(rng) - 0.5) + kPi, kPi), 400 + 200 * u(rng));
      f.opp_S = f.l_S.translated({-150, 0});
      f.centroid = {500 + 50 * u(rng), 250 + 50 * u(rng)};
      std::optional<PlateDetection> plate;
      std::optional<WheelDetection> wheels;
      if (t % 2) plate = plate_at({450 + 50 * u(rng), 200});
      else wheels = WheelDetection{{}, {400 + 100 * u(rng), 350}};
      for (auto o : {KeyOrientation::ImageParallel, KeyOrientation::VanishingPoint, KeyOrientation::GroundNormal}) {
        const auto a = select_keys(f, plate, wheels, 100.0, o, &ground);
        const auto b = select_keys(f, plate, wheels, 37.5, o, &ground);
        CHECK(norm(a.C - a.anchor) == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(norm(b.C - b.anchor) == doctest::Approx(37.5).epsilon(1e-12));
        const Point2 da = (1.0 / 100.0) * (a.C - a.anchor), db = (1.0 / 37.5) * (b.C - b.anchor);
        CHECK(norm(da - db) < 1e-12);
        CHECK(a.anchor == b.anchor);
      }
    }
  }

  TEST_CASE("ground-normal keys follow the world perpendicular") {
    const synth::PinholeCamera cam;
    const auto h = cam.ground_homography();
    // front edge from (-900, 8000) to (900, 8600): its world normal is the length axis
    const WorldPoint a{-900, 8000}, b{900, 8600};
    FootprintLines f;
    f.l_F = LineRT::through(project(h, a), project(h, b) - project(h, a));
    const WorldPoint n = (1.0 / norm(b - a)) * WorldPoint{-(b - a).y, (b - a).x};
    f.l_S = LineRT::through(project(h, b), project(h, b + 1000.0 * n) - project(h, b));
    f.opp_F = f.l_F.translated({0, -60});
    f.opp_S = f.l_S.translated({-60, 0});
    const WorldPoint mid = 0.5 * (a + b);
    f.centroid = project(h, mid + 2000.0 * n);
    const auto O = project(h, mid);
    const auto k = select_keys(f, plate_at({O.x, O.y - 40}), std::nullopt, 100.0, KeyOrientation::GroundNormal, &h);
    const WorldPoint d = unproject(h, k.C) - unproject(h, k.anchor);
    CHECK(std::abs(dot((1.0 / norm(d)) * d, n)) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("expected directions from a rendered vehicle mask") {
    const auto db = SpecDatabase::load_default();
    synth::SceneSpec empty;
    const auto bg = synth::render(empty).frame;
    for (const auto& pose : synth::default_poses()) {
      CAPTURE(pose.id);
      synth::SceneSpec scene;
      scene.vehicle = synth::SceneVehicle{db.at("test_vehicle"), pose.center, pose.heading_deg};
      const auto r = synth::render(scene);
      RasterImage mask(bg.width(), bg.height(), 1);
      for (int y = 0; y < bg.height(); ++y)
        for (int x = 0; x < bg.width(); ++x)
          if (r.frame.at(x, y, 0) != bg.at(x, y, 0) || r.frame.at(x, y, 1) != bg.at(x, y, 1)) mask.at(x, y) = 255;
      std::optional<double> hint;
      if (r.truth.plate_visible) hint = r.truth.l_F.theta;
      const auto h = scene.camera.ground_homography();
      const auto [tw, ts] = expected_directions(mask, h, {}, hint);
      // The visible ground edge is measured directly; the other family is a
      // ground perpendicular, whose image angle depends on where on the road it
      // is taken. It must match the perpendicular at some point of the footprint.
      const WorldPoint len{std::sin(pose.heading_deg * kDeg), std::cos(pose.heading_deg * kDeg)};
      const WorldPoint wid{len.y, -len.x};
      const double edge = hint ? tw : ts, other = hint ? ts : tw;
      const double truth_edge = hint ? r.truth.l_F.theta : r.truth.l_S.theta;
      const WorldPoint other_dir = hint ? len : wid;
      CHECK(line_angle_difference(edge, truth_edge) < 3 * kDeg);
      double nearest = kPi;
      const auto& spec = scene.vehicle->spec;
      for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
          const WorldPoint p = pose.center + ((i / 10.0 - 0.5) * spec.length_mm) * len + ((j / 10.0 - 0.5) * spec.width_mm) * wid;
          const auto a = project(h, p), b = project(h, p + 500.0 * other_dir);
          nearest = std::min(nearest, line_angle_difference(other, LineRT::through(a, b - a).theta));
        }
      CHECK(nearest < 1 * kDeg);
    }
  }

  TEST_CASE("orientation names") {
    for (auto o : {KeyOrientation::ImageParallel, KeyOrientation::VanishingPoint, KeyOrientation::GroundNormal})
      CHECK(parse_key_orientation(to_string(o)) == o);
    CHECK_THROWS_AS(parse_key_orientation("sideways"), Error);
    CHECK(to_string(AnchorKind::WheelQ) == "wheel_Q");
  }

  TEST_CASE("translation helpers") {
    const auto f = axis_lines(200, 300);
    const auto g = f.translated({10, 20});
    CHECK(g.l_F.rho == doctest::Approx(220));
    CHECK(g.l_S.rho == doctest::Approx(310));
    CHECK(g.centroid == Point2{210, 170});
    const auto c = f.corners();
    REQUIRE(c);
    CHECK(norm((*c)[0] - Point2{300, 200}) < 1e-9);
  }
}
