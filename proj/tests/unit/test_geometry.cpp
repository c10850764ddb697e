#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "monolocal/geometry.hpp"
#include "test_support.hpp"

using namespace monolocal;
using namespace testsupport;

namespace {

// Straight-line oracle: explicit multiply and dehomogenize.
ImagePoint oracle_project(const Homography& h, WorldPoint p) {
  const auto& e = h.entries();
  const double x = e[0] * p.x + e[1] * p.y + e[2];
  const double y = e[3] * p.x + e[4] * p.y + e[5];
  const double w = e[6] * p.x + e[7] * p.y + e[8];
  return {x / w, y / w};
}

Homography from_rows(std::array<double, 9> m) { return Homography::from_entries(m); }

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("gauge: unit Frobenius norm and non-negative h33") {
    const auto h = from_rows({2, 0, 0, 0, 2, 0, 0, 0, -2});
    double n = 0;
    for (double v : h.entries()) n += v * v;
    CHECK(n == doctest::Approx(1.0));
    CHECK(h.entries()[8] >= 0);
    CHECK(h.entries()[0] < 0);
    const auto scaled = from_rows({2, 0, 0, 0, 2, 0, 0, 0, 2}).entries();
    for (int i = 0; i < 9; ++i) CHECK(scaled[i] == doctest::Approx(Homography::identity().entries()[i]));
    CHECK_THROWS_AS(from_rows({1, 2, 3, 2, 4, 6, 0, 0, 1}), Error);
  }

  TEST_CASE("project and unproject examples") {
    const auto id = Homography::identity();
    auto p = project(id, {3.0, 4.0});
    CHECK(p.x == doctest::Approx(3.0));
    CHECK(p.y == doctest::Approx(4.0));
    p = project(from_rows({1, 0, 10, 0, 1, -5, 0, 0, 1}), {0, 0});
    CHECK(p.x == doctest::Approx(10.0));
    CHECK(p.y == doctest::Approx(-5.0));
    auto w = unproject(id, {100, 200});
    CHECK(w.x == doctest::Approx(100.0));
    CHECK(w.y == doctest::Approx(200.0));
    w = unproject(from_rows({0.1, 0, 0, 0, 0.1, 0, 0, 0, 1}), {50, 50});
    CHECK(w.x == doctest::Approx(500.0));
    CHECK(w.y == doctest::Approx(500.0));
  }

  TEST_CASE("project matches the straight-line oracle and round-trips") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
      const auto h = random_road_homography(rng);
      const auto w = random_road_points(rng, 1)[0];
      const auto p = project(h, w);
      const auto o = oracle_project(h, w);
      CHECK(std::abs(p.x - o.x) <= 1e-12 * std::max(1.0, std::abs(o.x)));
      CHECK(std::abs(p.y - o.y) <= 1e-12 * std::max(1.0, std::abs(o.y)));
      const auto back = project(h, unproject(h, p));
      CHECK(norm(back - p) < 1e-9);
    }
  }

  TEST_CASE("points on the horizon raise PointAtInfinity") {
    // w = y: the line y = 0 maps to infinity
    const auto h = from_rows({1, 0, 0, 0, 0, 1, 0, 1, 0});
    try {
      project(h, {5.0, 0.0});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PointAtInfinity);
    }
  }

  TEST_CASE("composition is associative through homogeneous coordinates") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
      const auto a = random_road_homography(rng);
      const Homography b = Homography::from_matrix(Eigen::Matrix3d::Identity() + 0.01 * Eigen::Matrix3d::Random());
      const auto ab = Homography::from_matrix(a.matrix() * b.matrix());
      const auto w = random_road_points(rng, 1)[0];
      const auto mid = project(b, w);
      const auto lhs = project(ab, w);
      const auto rhs = project(a, WorldPoint{mid.x, mid.y});
      CHECK(norm(lhs - rhs) < 1e-7 * std::max(1.0, norm(lhs)));
    }
  }

  TEST_CASE("dlt examples") {
    std::vector<Correspondence> sq = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{1, 1}, {1, 1}}, {{0, 1}, {0, 1}}};
    const auto h = dlt_fit(sq);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(h.entries()[i] - Homography::identity().entries()[i]) < 1e-10);

    const auto affine = from_rows({1, 0, 10, 0, 2, 0, 0, 0, 1});
    std::vector<Correspondence> c;
    for (WorldPoint w : {WorldPoint{0, 0}, {3, 0}, {3, 5}, {0, 5}}) c.push_back({w, project(affine, w)});
    const auto fit = dlt_fit(c);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(fit.entries()[i] - affine.entries()[i]) < 1e-10);
    CHECK(max_reprojection(fit, c) < 1e-9);

    CHECK_THROWS_AS(dlt_fit(std::span(sq.data(), 3)), Error);
    std::vector<Correspondence> line = {{{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, {{2, 2}, {2, 2}}, {{3, 3}, {3, 3}}};
    CHECK_THROWS_AS(dlt_fit(line), Error);
  }

  TEST_CASE("dlt is exact on noise-free data for any n >= 4") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      const auto h = random_road_homography(rng);
      const auto c = exact_correspondences(h, random_road_points(rng, 4 + i % 17));
      CHECK(max_reprojection(dlt_fit(c), c) < 1e-8);
    }
  }

  TEST_CASE("dlt is invariant to a similarity applied to the image points") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const auto h = random_road_homography(rng);
      const auto c = exact_correspondences(h, random_road_points(rng, 10));
      const double s = 0.3 + std::abs(u(rng)) * 3, a = u(rng) * 3, tx = u(rng) * 500, ty = u(rng) * 500;
      Eigen::Matrix3d t;
      t << s * std::cos(a), -s * std::sin(a), tx, s * std::sin(a), s * std::cos(a), ty, 0, 0, 1;
      auto moved = c;
      for (auto& x : moved) {
        const Eigen::Vector3d p = t * Eigen::Vector3d(x.image.x, x.image.y, 1.0);
        x.image = {p.x(), p.y()};
      }
      const auto fit = dlt_fit(moved);
      const auto mapped_back = Homography::from_matrix(t.inverse() * fit.matrix());
      CHECK(max_reprojection(mapped_back, c) < 1e-9);
    }
  }

  TEST_CASE("ransac with no outliers keeps everything") {
    std::mt19937_64 rng(5);
    const auto h = random_road_homography(rng);
    const auto c = exact_correspondences(h, random_road_points(rng, 8));
    const auto r = ransac_fit(c, 2.0, 500, 1);
    CHECK(r.inliers == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
    const auto d = dlt_fit(c);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(r.homography.entries()[i] - d.entries()[i]) < 1e-9);
  }

  TEST_CASE("ransac isolates gross outliers exactly") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi), mag(50.0, 200.0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto h = random_road_homography(rng);
      auto c = exact_correspondences(h, random_road_points(rng, 17));
      std::vector<std::size_t> expected;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (i % 4 == 3 || i == 16) {
          const double a = ang(rng), m = mag(rng);
          c[i].image = c[i].image + Point2{m * std::cos(a), m * std::sin(a)};
        } else {
          expected.push_back(i);
        }
      }
      REQUIRE(expected.size() == 12);
      const auto r = ransac_fit(c, 2.0, 500, trial);
      CHECK(r.inliers == expected);
    }
  }

  TEST_CASE("ransac tolerates pixel noise with 30% outliers") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(1000 + seed);
      std::normal_distribution<double> noise(0.0, 0.5);
      std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi), mag(50.0, 300.0);
      const auto h = random_road_homography(rng);
      auto c = exact_correspondences(h, random_road_points(rng, 20));
      for (auto& x : c) x.image = x.image + Point2{noise(rng), noise(rng)};
      // the reference is the best the clean inliers allow
      const auto best = dlt_fit(c);
      for (std::size_t i = 0; i < 9; ++i) {
        const double a = ang(rng), m = mag(rng);
        c.push_back({random_road_points(rng, 1)[0], project(h, random_road_points(rng, 1)[0]) + Point2{m * std::cos(a), m * std::sin(a)}});
      }
      const auto r = ransac_fit(c, 2.0, 500, seed);
      // held-out grid
      double worst = 0, floor = 0;
      for (double x = -4000; x <= 4000; x += 1000)
        for (double y = 3000; y <= 18000; y += 3000) {
          worst = std::max(worst, norm(project(r.homography, {x, y}) - project(h, {x, y})));
          floor = std::max(floor, norm(project(best, {x, y}) - project(h, {x, y})));
        }
      ok += worst < floor + 1.0;
    }
    CHECK(ok >= 95);
  }

  TEST_CASE("ransac is reproducible per seed") {
    std::mt19937_64 rng(8);
    const auto h = random_road_homography(rng);
    auto c = exact_correspondences(h, random_road_points(rng, 15));
    c[2].image = c[2].image + Point2{80, 0};
    c[9].image = c[9].image + Point2{0, -60};
    const auto a = ransac_fit(c, 2.0, 500, 77);
    const auto b = ransac_fit(c, 2.0, 500, 77);
    CHECK(a.homography.entries() == b.homography.entries());
    CHECK(a.inliers == b.inliers);
  }

  TEST_CASE("ransac failure modes") {
    std::vector<Correspondence> three(3);
    try {
      ransac_fit(three, 2.0, 100, 0);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientData);
    }
  }

  TEST_CASE("uniform_index stays in range and is deterministic") {
    std::mt19937_64 a(1), b(1);
    for (int i = 0; i < 1000; ++i) {
      const auto x = uniform_index(a, 7);
      CHECK(x < 7);
      CHECK(x == uniform_index(b, 7));
    }
  }

  TEST_CASE("correspondence text format") {
    const auto c = parse_correspondences("# header\n1 2 3 4\n\n  5.5 6 7 8.25 # trailing\n");
    REQUIRE(c.size() == 2);
    CHECK(c[1].world.x == 5.5);
    CHECK(c[1].image.y == 8.25);
    CHECK_THROWS_AS(parse_correspondences("1 2 3\n"), Error);
    CHECK_THROWS_AS(parse_correspondences("1 2 3 x\n"), Error);
  }
}
