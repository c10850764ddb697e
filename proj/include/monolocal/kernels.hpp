#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops of the raster stages. Every kernel has a scalar
// reference implementation and, where the build and CPU allow it, an AVX2
// variant. Variants are required to be bit-identical to the scalar reference:
// they use the same operation order and no fused multiply-add.

namespace monolocal::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

// Inclusive per-channel bounds on 8-bit HSV; hue wraps through 0 when h_lo > h_hi.
struct HsvBand {
  std::uint8_t h_lo = 0, h_hi = 179;
  std::uint8_t s_lo = 0, s_hi = 255;
  std::uint8_t v_lo = 0, v_hi = 255;
};

struct KernelTable {
  Isa isa;

  // gray = round(0.299 R + 0.587 G + 0.114 B), computed exactly.
  void (*rgb_to_gray)(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels);

  // dst[x] = sum_k taps[k] * src[clamp(x + k - radius)], k = 0..2*radius.
  void (*convolve_row_u8)(const std::uint8_t* src, float* dst, int width, const float* taps,
                          int radius);

  // dst[x] = sum_k taps[k] * rows[k][x]; the caller resolves vertical borders.
  void (*convolve_cols)(const float* const* rows, float* dst, int width, const float* taps,
                        int radius);

  // 3x3 Sobel over one output row with replicated horizontal border.
  void (*sobel_row)(const float* up, const float* mid, const float* down, float* gx, float* gy,
                    float* magnitude, int width);

  // mask = 255 where the interleaved HSV pixel lies inside the band, else 0.
  void (*hsv_in_range)(const std::uint8_t* hsv, std::uint8_t* mask, std::size_t pixels,
                       const HsvBand& band);
};

bool available(Isa isa);

// Table for one instruction set; throws monolocal::Error if unavailable.
const KernelTable& table(Isa isa);

// The table chosen at first use: the best available ISA, unless the
// MONOLOCAL_ISA environment variable names another one ("scalar", "avx2").
const KernelTable& active();

// Overrides the active selection (tests and benchmarks).
void select(Isa isa);

}  // namespace monolocal::kernels
