#pragma once

#include <cmath>

#include "monolocal/kernels.hpp"

namespace monolocal::kernels::detail {

const KernelTable& scalar_table();
#ifdef MONOLOCAL_HAVE_AVX2
const KernelTable& avx2_table();
#endif

// Scalar helpers shared by the SIMD variants for border and tail handling.
void scalar_rgb_to_gray(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels);
void scalar_hsv_in_range(const std::uint8_t* hsv, std::uint8_t* mask, std::size_t pixels,
                         const HsvBand& band);

inline float row_tap_sum(const std::uint8_t* src, int x, int width, const float* taps,
                         int radius) {
  float acc = 0.0f;
  for (int k = 0; k <= 2 * radius; ++k) {
    int xi = x + k - radius;
    xi = xi < 0 ? 0 : (xi >= width ? width - 1 : xi);
    acc = acc + taps[k] * static_cast<float>(src[xi]);
  }
  return acc;
}

inline void sobel_at(const float* up, const float* mid, const float* down, int x, int width,
                     float* gx, float* gy, float* magnitude) {
  const int l = x > 0 ? x - 1 : 0;
  const int r = x + 1 < width ? x + 1 : width - 1;
  const float dx = ((up[r] - up[l]) + 2.0f * (mid[r] - mid[l])) + (down[r] - down[l]);
  const float dy = ((down[l] + 2.0f * down[x]) + down[r]) - ((up[l] + 2.0f * up[x]) + up[r]);
  gx[x] = dx;
  gy[x] = dy;
  magnitude[x] = std::sqrt(dx * dx + dy * dy);
}

}  // namespace monolocal::kernels::detail
