#include "kernel_impl.hpp"

namespace monolocal::kernels::detail {

void scalar_rgb_to_gray(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels) {
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint32_t r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    // Weights are exact thousandths, so integer arithmetic rounds half-up exactly.
    gray[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
}

void scalar_hsv_in_range(const std::uint8_t* hsv, std::uint8_t* mask, std::size_t pixels,
                         const HsvBand& band) {
  const bool wraps = band.h_lo > band.h_hi;
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint8_t h = hsv[3 * i], s = hsv[3 * i + 1], v = hsv[3 * i + 2];
    const bool h_ok = wraps ? (h >= band.h_lo || h <= band.h_hi)
                            : (h >= band.h_lo && h <= band.h_hi);
    const bool ok = h_ok && s >= band.s_lo && s <= band.s_hi && v >= band.v_lo && v <= band.v_hi;
    mask[i] = ok ? 255 : 0;
  }
}

namespace {

void convolve_row_u8(const std::uint8_t* src, float* dst, int width, const float* taps,
                     int radius) {
  for (int x = 0; x < width; ++x) dst[x] = row_tap_sum(src, x, width, taps, radius);
}

void convolve_cols(const float* const* rows, float* dst, int width, const float* taps,
                   int radius) {
  for (int x = 0; x < width; ++x) {
    float acc = 0.0f;
    for (int k = 0; k <= 2 * radius; ++k) acc = acc + taps[k] * rows[k][x];
    dst[x] = acc;
  }
}

void sobel_row(const float* up, const float* mid, const float* down, float* gx, float* gy,
               float* magnitude, int width) {
  for (int x = 0; x < width; ++x) sobel_at(up, mid, down, x, width, gx, gy, magnitude);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::Scalar, scalar_rgb_to_gray, convolve_row_u8, convolve_cols,
                             sobel_row, scalar_hsv_in_range};
  return t;
}

}  // namespace monolocal::kernels::detail
