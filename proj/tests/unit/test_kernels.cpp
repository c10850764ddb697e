#include <random>
#include <vector>

#include "doctest.h"
#include "monolocal/imgproc.hpp"
#include "monolocal/kernels.hpp"

using namespace monolocal;
using kernels::Isa;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng());
  return v;
}

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n, float lo, float hi) {
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (auto& f : v) f = d(rng);
  return v;
}

const int kWidths[] = {1, 2, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 1280};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar table is always available") {
    CHECK(kernels::available(Isa::Scalar));
    CHECK(kernels::table(Isa::Scalar).isa == Isa::Scalar);
    CHECK(kernels::to_string(Isa::Avx2) == "avx2");
  }

  TEST_CASE("rgb_to_gray matches the exact BT.601 rounding") {
    const auto& k = kernels::table(Isa::Scalar);
    std::uint8_t px[3] = {255, 0, 0}, g = 0;
    k.rgb_to_gray(px, &g, 1);
    CHECK(g == 76);  // 0.299 * 255 = 76.245
    std::uint8_t white[3] = {255, 255, 255};
    k.rgb_to_gray(white, &g, 1);
    CHECK(g == 255);
    // exhaustive over the grey diagonal and a strided cube
    for (int r = 0; r < 256; r += 5) {
      for (int gg = 0; gg < 256; gg += 7) {
        for (int b = 0; b < 256; b += 11) {
          std::uint8_t p[3] = {std::uint8_t(r), std::uint8_t(gg), std::uint8_t(b)};
          k.rgb_to_gray(p, &g, 1);
          const long num = 299L * r + 587L * gg + 114L * b;
          CHECK(g == static_cast<int>((num + 500) / 1000));
        }
      }
    }
  }

  TEST_CASE("AVX2 variants are bit-identical to the scalar reference") {
    if (!kernels::available(Isa::Avx2)) {
      MESSAGE("AVX2 not available on this CPU or build; skipping");
      return;
    }
    const auto& s = kernels::table(Isa::Scalar);
    const auto& v = kernels::table(Isa::Avx2);
    std::mt19937_64 rng(42);

    for (int w : kWidths) {
      CAPTURE(w);
      const auto rgb = random_bytes(rng, 3 * w);
      std::vector<std::uint8_t> g1(w), g2(w);
      s.rgb_to_gray(rgb.data(), g1.data(), w);
      v.rgb_to_gray(rgb.data(), g2.data(), w);
      CHECK(g1 == g2);

      for (int radius : {1, 2, 3}) {
        const auto taps = random_floats(rng, 2 * radius + 1, 0.0f, 1.0f);
        const auto src = random_bytes(rng, w);
        std::vector<float> d1(w), d2(w);
        s.convolve_row_u8(src.data(), d1.data(), w, taps.data(), radius);
        v.convolve_row_u8(src.data(), d2.data(), w, taps.data(), radius);
        CHECK(d1 == d2);

        std::vector<std::vector<float>> rows;
        std::vector<const float*> ptrs;
        for (int r = 0; r < 2 * radius + 1; ++r) rows.push_back(random_floats(rng, w, 0.0f, 255.0f));
        for (auto& r : rows) ptrs.push_back(r.data());
        s.convolve_cols(ptrs.data(), d1.data(), w, taps.data(), radius);
        v.convolve_cols(ptrs.data(), d2.data(), w, taps.data(), radius);
        CHECK(d1 == d2);
      }

      const auto up = random_floats(rng, w, 0.0f, 255.0f), mid = random_floats(rng, w, 0.0f, 255.0f),
                 down = random_floats(rng, w, 0.0f, 255.0f);
      std::vector<float> gx1(w), gy1(w), m1(w), gx2(w), gy2(w), m2(w);
      s.sobel_row(up.data(), mid.data(), down.data(), gx1.data(), gy1.data(), m1.data(), w);
      v.sobel_row(up.data(), mid.data(), down.data(), gx2.data(), gy2.data(), m2.data(), w);
      CHECK(gx1 == gx2);
      CHECK(gy1 == gy2);
      CHECK(m1 == m2);

      for (const HsvBand band : {HsvBand{0, 179, 0, 60, 180, 255}, HsvBand{170, 10, 50, 255, 50, 255},
                                 HsvBand{20, 35, 80, 255, 120, 255}}) {
        auto hsv = random_bytes(rng, 3 * w);
        for (int i = 0; i < w; ++i) hsv[3 * i] %= 180;
        std::vector<std::uint8_t> k1(w), k2(w);
        s.hsv_in_range(hsv.data(), k1.data(), w, band);
        v.hsv_in_range(hsv.data(), k2.data(), w, band);
        CHECK(k1 == k2);
      }
    }
  }

  TEST_CASE("whole-image stages agree across ISAs") {
    if (!kernels::available(Isa::Avx2)) return;
    std::mt19937_64 rng(7);
    RasterImage rgb(97, 61, 3);
    for (auto& b : rgb.data()) b = static_cast<std::uint8_t>(rng());

    const Isa before = kernels::active().isa;
    kernels::select(Isa::Scalar);
    const auto gray_s = to_grayscale(rgb);
    const auto edges_s = canny(gray_s, CannyParams{20.0f, 60.0f, 1.4f});
    const auto mask_s = color_mask(to_hsv(rgb), HsvBand{0, 179, 0, 60, 180, 255});
    kernels::select(Isa::Avx2);
    const auto gray_v = to_grayscale(rgb);
    const auto edges_v = canny(gray_v, CannyParams{20.0f, 60.0f, 1.4f});
    const auto mask_v = color_mask(to_hsv(rgb), HsvBand{0, 179, 0, 60, 180, 255});
    kernels::select(before);

    CHECK(gray_s == gray_v);
    CHECK(edges_s == edges_v);
    CHECK(mask_s == mask_v);
  }
}
