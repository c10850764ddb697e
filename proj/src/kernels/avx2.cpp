#include <immintrin.h>

#include <array>

#include "kernel_impl.hpp"

namespace monolocal::kernels::detail {

namespace {

// Shuffle masks that pull one channel out of 48 interleaved bytes (16 pixels)
// held in three 16-byte registers.
struct DeinterleaveMasks {
  alignas(16) std::array<std::array<std::array<std::int8_t, 16>, 3>, 3> m{};

  DeinterleaveMasks() {
    for (int channel = 0; channel < 3; ++channel) {
      for (int part = 0; part < 3; ++part) {
        for (int lane = 0; lane < 16; ++lane) {
          const int src = 3 * lane + channel - 16 * part;
          m[channel][part][lane] = (src >= 0 && src < 16) ? static_cast<std::int8_t>(src) : -1;
        }
      }
    }
  }
};

const DeinterleaveMasks& masks() {
  static const DeinterleaveMasks m;
  return m;
}

inline __m128i load_mask(int channel, int part) {
  return _mm_load_si128(reinterpret_cast<const __m128i*>(masks().m[channel][part].data()));
}

inline void deinterleave16(const std::uint8_t* p, __m128i& c0, __m128i& c1, __m128i& c2) {
  const __m128i a0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
  const __m128i a1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 16));
  const __m128i a2 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 32));
  __m128i* out[3] = {&c0, &c1, &c2};
  for (int c = 0; c < 3; ++c) {
    *out[c] = _mm_or_si128(
        _mm_or_si128(_mm_shuffle_epi8(a0, load_mask(c, 0)), _mm_shuffle_epi8(a1, load_mask(c, 1))),
        _mm_shuffle_epi8(a2, load_mask(c, 2)));
  }
}

// 8 gray values from 8 widened channel lanes.
inline __m256i gray8(__m256i r, __m256i g, __m256i b) {
  const __m256i acc = _mm256_add_epi32(
      _mm256_add_epi32(_mm256_mullo_epi32(r, _mm256_set1_epi32(299)),
                       _mm256_mullo_epi32(g, _mm256_set1_epi32(587))),
      _mm256_add_epi32(_mm256_mullo_epi32(b, _mm256_set1_epi32(114)), _mm256_set1_epi32(500)));
  // acc < 2^24 is exact in float and acc / 1000 never rounds across an integer.
  const __m256 q = _mm256_div_ps(_mm256_cvtepi32_ps(acc), _mm256_set1_ps(1000.0f));
  return _mm256_cvttps_epi32(q);
}

void rgb_to_gray(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels) {
  std::size_t i = 0;
  for (; i + 16 <= pixels; i += 16) {
    __m128i r, g, b;
    deinterleave16(rgb + 3 * i, r, g, b);
    const __m256i lo = gray8(_mm256_cvtepu8_epi32(r), _mm256_cvtepu8_epi32(g),
                             _mm256_cvtepu8_epi32(b));
    const __m256i hi =
        gray8(_mm256_cvtepu8_epi32(_mm_srli_si128(r, 8)), _mm256_cvtepu8_epi32(_mm_srli_si128(g, 8)),
              _mm256_cvtepu8_epi32(_mm_srli_si128(b, 8)));
    // Pack 16 x i32 -> 16 x u8 (values are already within 0..255).
    const __m256i w16 = _mm256_permute4x64_epi64(_mm256_packus_epi32(lo, hi), 0xD8);
    const __m128i w16lo = _mm256_castsi256_si128(w16);
    const __m128i w16hi = _mm256_extracti128_si256(w16, 1);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(gray + i), _mm_packus_epi16(w16lo, w16hi));
  }
  scalar_rgb_to_gray(rgb + 3 * i, gray + i, pixels - i);
}

void convolve_row_u8(const std::uint8_t* src, float* dst, int width, const float* taps,
                     int radius) {
  const int taps_n = 2 * radius + 1;
  int x = 0;
  for (; x < radius && x < width; ++x) dst[x] = row_tap_sum(src, x, width, taps, radius);
  for (; x + 8 + radius <= width; x += 8) {
    __m256 acc = _mm256_setzero_ps();
    for (int k = 0; k < taps_n; ++k) {
      const __m128i raw =
          _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + x + k - radius));
      const __m256 v = _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(raw));
      acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(taps[k]), v));
    }
    _mm256_storeu_ps(dst + x, acc);
  }
  for (; x < width; ++x) dst[x] = row_tap_sum(src, x, width, taps, radius);
}

void convolve_cols(const float* const* rows, float* dst, int width, const float* taps,
                   int radius) {
  const int taps_n = 2 * radius + 1;
  int x = 0;
  for (; x + 8 <= width; x += 8) {
    __m256 acc = _mm256_setzero_ps();
    for (int k = 0; k < taps_n; ++k) {
      acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(taps[k]), _mm256_loadu_ps(rows[k] + x)));
    }
    _mm256_storeu_ps(dst + x, acc);
  }
  for (; x < width; ++x) {
    float acc = 0.0f;
    for (int k = 0; k < taps_n; ++k) acc = acc + taps[k] * rows[k][x];
    dst[x] = acc;
  }
}

void sobel_row(const float* up, const float* mid, const float* down, float* gx, float* gy,
               float* magnitude, int width) {
  if (width < 10) {
    for (int x = 0; x < width; ++x) sobel_at(up, mid, down, x, width, gx, gy, magnitude);
    return;
  }
  sobel_at(up, mid, down, 0, width, gx, gy, magnitude);
  const __m256 two = _mm256_set1_ps(2.0f);
  int x = 1;
  for (; x + 8 < width; x += 8) {
    const __m256 ul = _mm256_loadu_ps(up + x - 1), uc = _mm256_loadu_ps(up + x),
                 ur = _mm256_loadu_ps(up + x + 1);
    const __m256 ml = _mm256_loadu_ps(mid + x - 1), mr = _mm256_loadu_ps(mid + x + 1);
    const __m256 dl = _mm256_loadu_ps(down + x - 1), dc = _mm256_loadu_ps(down + x),
                 dr = _mm256_loadu_ps(down + x + 1);
    const __m256 dx = _mm256_add_ps(
        _mm256_add_ps(_mm256_sub_ps(ur, ul), _mm256_mul_ps(two, _mm256_sub_ps(mr, ml))),
        _mm256_sub_ps(dr, dl));
    const __m256 dy = _mm256_sub_ps(
        _mm256_add_ps(_mm256_add_ps(dl, _mm256_mul_ps(two, dc)), dr),
        _mm256_add_ps(_mm256_add_ps(ul, _mm256_mul_ps(two, uc)), ur));
    _mm256_storeu_ps(gx + x, dx);
    _mm256_storeu_ps(gy + x, dy);
    _mm256_storeu_ps(magnitude + x,
                     _mm256_sqrt_ps(_mm256_add_ps(_mm256_mul_ps(dx, dx), _mm256_mul_ps(dy, dy))));
  }
  for (; x < width; ++x) sobel_at(up, mid, down, x, width, gx, gy, magnitude);
}

inline __m256i in_range_u8(__m256i v, std::uint8_t lo, std::uint8_t hi) {
  const __m256i ge = _mm256_cmpeq_epi8(_mm256_max_epu8(v, _mm256_set1_epi8(static_cast<char>(lo))), v);
  const __m256i le = _mm256_cmpeq_epi8(_mm256_min_epu8(v, _mm256_set1_epi8(static_cast<char>(hi))), v);
  return _mm256_and_si256(ge, le);
}

void hsv_in_range(const std::uint8_t* hsv, std::uint8_t* mask, std::size_t pixels,
                  const HsvBand& band) {
  const bool wraps = band.h_lo > band.h_hi;
  std::size_t i = 0;
  for (; i + 32 <= pixels; i += 32) {
    __m128i h0, s0, v0, h1, s1, v1;
    deinterleave16(hsv + 3 * i, h0, s0, v0);
    deinterleave16(hsv + 3 * i + 48, h1, s1, v1);
    const __m256i h = _mm256_set_m128i(h1, h0);
    const __m256i s = _mm256_set_m128i(s1, s0);
    const __m256i v = _mm256_set_m128i(v1, v0);
    __m256i h_ok;
    if (wraps) {
      h_ok = _mm256_or_si256(in_range_u8(h, band.h_lo, 255), in_range_u8(h, 0, band.h_hi));
    } else {
      h_ok = in_range_u8(h, band.h_lo, band.h_hi);
    }
    const __m256i ok = _mm256_and_si256(
        h_ok, _mm256_and_si256(in_range_u8(s, band.s_lo, band.s_hi), in_range_u8(v, band.v_lo, band.v_hi)));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(mask + i), ok);
  }
  scalar_hsv_in_range(hsv + 3 * i, mask + i, pixels - i, band);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::Avx2, rgb_to_gray, convolve_row_u8, convolve_cols, sobel_row,
                             hsv_in_range};
  return t;
}

}  // namespace monolocal::kernels::detail
