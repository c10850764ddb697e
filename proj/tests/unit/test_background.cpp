#include <numeric>
#include <random>

#include "doctest.h"
#include "monolocal/background.hpp"
#include "test_support.hpp"

using namespace monolocal;
using namespace testsupport;

namespace {

RasterImage noisy(int w, int h, Rgb c, double sigma, std::mt19937_64& rng) {
  RasterImage img = solid(w, h, c);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& b : img.data()) b = static_cast<std::uint8_t>(std::clamp(std::lround(b + n(rng)), 0L, 255L));
  return img;
}

RasterImage rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
  RasterImage m(w, h, 1);
  fill_rect(m, x0, y0, rw, rh, Rgb{255, 255, 255});
  return m;
}

void check_mixture_invariants(const BackgroundModel& m) {
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const auto px = m.mixture(x, y);
      const double sum = std::accumulate(px.weight.begin(), px.weight.end(), 0.0);
      REQUIRE(std::abs(sum - 1.0) <= 1e-6);
      for (float v : px.variance) REQUIRE(v >= m.params().var_min);
    }
  }
}

}  // namespace

TEST_SUITE("background") {
  TEST_CASE("bootstrap on identical frames floors the variance") {
    std::vector<RasterImage> frames(150, RasterImage(4, 3, 1, 100));
    const auto m = bootstrap(frames);
    const auto px = m.mixture(2, 1);
    const auto dom = std::max_element(px.weight.begin(), px.weight.end()) - px.weight.begin();
    CHECK(px.mean[dom][0] == doctest::Approx(100.0f));
    CHECK(px.variance[dom] == doctest::Approx(4.0f));
    CHECK(m.dominant_background() == RasterImage(4, 3, 1, 100));
  }

  TEST_CASE("bootstrap on alternating frames gives the two-point variance") {
    std::vector<RasterImage> frames;
    for (int i = 0; i < 150; ++i) frames.emplace_back(4, 3, 1, i % 2 ? 110 : 90);
    const auto px = bootstrap(frames).mixture(0, 0);
    const auto dom = std::max_element(px.weight.begin(), px.weight.end()) - px.weight.begin();
    CHECK(px.mean[dom][0] == doctest::Approx(100.0f));
    CHECK(px.variance[dom] == doctest::Approx(100.0f));
  }

  TEST_CASE("single-frame bootstrap uses the initial variance") {
    std::vector<RasterImage> one{RasterImage(2, 2, 3, 7)};
    const auto px = bootstrap(one).mixture(1, 1);
    const auto dom = std::max_element(px.weight.begin(), px.weight.end()) - px.weight.begin();
    CHECK(px.mean[dom][2] == doctest::Approx(7.0f));
    CHECK(px.variance[dom] == doctest::Approx(225.0f));
  }

  TEST_CASE("incremental accumulator matches batch bootstrap") {
    std::mt19937_64 rng(1);
    std::vector<RasterImage> frames;
    for (int i = 0; i < 12; ++i) frames.push_back(noisy(9, 5, Rgb{80, 120, 160}, 5.0, rng));
    BootstrapAccumulator acc;
    for (const auto& f : frames) acc.add(f);
    CHECK(acc.count() == 12);
    CHECK(acc.finish() == bootstrap(frames));
    CHECK_THROWS_AS(acc.add(RasterImage(3, 3, 3)), Error);
    CHECK_THROWS_AS(BootstrapAccumulator().finish(), Error);
  }

  TEST_CASE("segment matching rule") {
    std::vector<RasterImage> frames(20, RasterImage(5, 5, 1, 100));
    auto m = bootstrap(frames);
    CHECK(count_nonzero(m.segment(RasterImage(5, 5, 1, 100))) == 0);
    RasterImage f(5, 5, 1, 100);
    f.at(2, 3) = 200;
    const auto mask = m.segment(f);
    CHECK(mask.at(2, 3) == 255);
    CHECK(count_nonzero(mask) == 1);
    CHECK_THROWS_AS(m.segment(RasterImage(4, 5, 1)), Error);
  }

  TEST_CASE("segment is deterministic in mask and state") {
    std::mt19937_64 rng(2);
    std::vector<RasterImage> frames;
    for (int i = 0; i < 10; ++i) frames.push_back(noisy(16, 12, Rgb{90, 90, 90}, 3.0, rng));
    auto a = bootstrap(frames);
    auto b = a;
    for (int i = 0; i < 20; ++i) {
      const auto f = noisy(16, 12, Rgb{static_cast<std::uint8_t>(60 + 5 * i), 90, 90}, 4.0, rng);
      CHECK(a.segment(f) == b.segment(f));
      CHECK(a == b);
    }
  }

  TEST_CASE("weights stay normalized and variances floored under random updates") {
    std::mt19937_64 rng(3);
    std::vector<RasterImage> frames;
    for (int i = 0; i < 5; ++i) frames.push_back(noisy(6, 5, Rgb{100, 100, 100}, 20.0, rng));
    auto m = bootstrap(frames);
    for (int step = 0; step < 2000; ++step) {
      RasterImage f(6, 5, 3);
      // mixes of static, drifting and random pixels
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x)
          for (int c = 0; c < 3; ++c)
            f.at(x, y, c) = static_cast<std::uint8_t>(x < 2 ? 100 : x < 4 ? (step / 7 + c * 40) % 256 : rng() % 256);
      m.segment(f);
      if (step % 250 == 0) check_mixture_invariants(m);
    }
    check_mixture_invariants(m);
  }

  TEST_CASE("a pixel constant for 200 frames becomes background") {
    std::vector<RasterImage> frames(150, RasterImage(3, 3, 3, 40));
    auto m = bootstrap(frames);
    const RasterImage novel(3, 3, 3, 210);
    for (int i = 0; i < 200; ++i) m.segment(novel);
    CHECK(count_nonzero(m.segment(novel)) == 0);
  }

  TEST_CASE("moving rectangle is segmented with high IoU") {
    const int w = 160, h = 120;
    std::mt19937_64 rng(4);
    std::vector<RasterImage> boot;
    for (int i = 0; i < 30; ++i) boot.push_back(noisy(w, h, Rgb{100, 100, 100}, 1.0, rng));
    auto m = bootstrap(boot);
    for (int t = 0; t < 40; ++t) {
      const int x0 = 5 + 3 * t, y0 = 50 + t / 4;
      auto f = noisy(w, h, Rgb{100, 100, 100}, 1.0, rng);
      fill_rect(f, x0, y0, 20, 10, Rgb{40, 160, 220});
      const auto fg = remove_shadow(f, m.segment(f), m);
      CAPTURE(t);
      CHECK(iou(fg, rect_mask(w, h, x0, y0, 20, 10)) >= 0.8);
    }
  }

  TEST_CASE("shadow removal") {
    std::vector<RasterImage> boot(5, solid(20, 10, Rgb{120, 110, 100}));
    auto m = bootstrap(boot);
    auto f = solid(20, 10, Rgb{120, 110, 100});
    f.at(3, 3, 0) = 84, f.at(3, 3, 1) = 77, f.at(3, 3, 2) = 70;  // 70% brightness, same hue
    f.at(5, 5, 0) = 30, f.at(5, 5, 1) = 60, f.at(5, 5, 2) = 200;   // different hue
    RasterImage mask(20, 10, 1);
    mask.at(3, 3) = 255;
    mask.at(5, 5) = 255;
    const auto out = remove_shadow(f, mask, m);
    CHECK(out.at(3, 3) == 0);
    CHECK(out.at(5, 5) == 255);
  }

  TEST_CASE("rectangle with a cast shadow recovers the rectangle") {
    const int w = 120, h = 90;
    const Rgb road{110, 105, 95};
    std::vector<RasterImage> boot(10, solid(w, h, road));
    auto m = bootstrap(boot);
    auto f = solid(w, h, road);
    const Rgb shade{77, 74, 67};
    fill_rect(f, 40, 30, 30, 20, shade);  // shadow offset down-right of the object
    fill_rect(f, 30, 20, 30, 20, Rgb{200, 30, 30});
    const auto fg = remove_shadow(f, m.segment(f), m);
    CHECK(iou(fg, rect_mask(w, h, 30, 20, 30, 20)) >= 0.8);
  }

  TEST_CASE("extract_roi examples") {
    const int w = 400, h = 300;
    auto box = extract_roi(rect_mask(w, h, 200, 100, 100, 50), 10);
    REQUIRE(box);
    CHECK(*box == RoiBox{190, 95, 120, 60});
    CHECK(!extract_roi(RasterImage(w, h, 1), 1));

    RasterImage two = rect_mask(w, h, 10, 10, 25, 20);
    fill_rect(two, 100, 100, 100, 50, Rgb{255, 255, 255});
    box = extract_roi(two, 10);
    REQUIRE(box);
    CHECK(*box == RoiBox{90, 95, 120, 60});
    CHECK(!extract_roi(rect_mask(w, h, 0, 0, 5, 5), 100));
  }

  TEST_CASE("roi always contains the largest blob and stays in the frame") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
      RasterImage mask(64, 48, 1);
      for (int k = 0; k < 3; ++k)
        fill_rect(mask, int(rng() % 64) - 5, int(rng() % 48) - 5, 1 + int(rng() % 30), 1 + int(rng() % 20),
                  Rgb{255, 255, 255});
      const auto blobs = connected_components(mask);
      const auto box = extract_roi(mask, 1);
      REQUIRE(box);
      const auto best = *std::max_element(blobs.begin(), blobs.end(), [](auto& a, auto& b) { return a.area < b.area; });
      CHECK(box->x <= best.x_min);
      CHECK(box->y <= best.y_min);
      CHECK(box->x + box->w - 1 >= best.x_max);
      CHECK(box->y + box->h - 1 >= best.y_max);
      CHECK(box->x >= 0);
      CHECK(box->x + box->w <= 64);
    }
  }

  TEST_CASE("model serialization round-trips") {
    std::mt19937_64 rng(6);
    std::vector<RasterImage> frames;
    for (int i = 0; i < 4; ++i) frames.push_back(noisy(7, 6, Rgb{10, 200, 30}, 8.0, rng));
    auto m = bootstrap(frames);
    m.segment(noisy(7, 6, Rgb{200, 10, 30}, 8.0, rng));
    const auto bytes = m.serialize();
    CHECK(BackgroundModel::deserialize(bytes) == m);
    TempDir dir("bg");
    m.save(dir / "model.bin");
    CHECK(BackgroundModel::load(dir / "model.bin") == m);
    auto bad = bytes;
    bad[0] ^= 0xff;
    CHECK_THROWS_AS(BackgroundModel::deserialize(bad), Error);
    CHECK_THROWS_AS(BackgroundModel::deserialize(std::span(bytes.data(), bytes.size() - 3)), Error);
  }

  TEST_CASE("parameter validation") {
    BackgroundParams p;
    p.components = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.learning_rate = 1.5f;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.shadow_v_lo = 0.99f;
    CHECK_THROWS_AS(p.validate(), Error);
  }
}
