#pragma once

#include "monolocal/footprint.hpp"
#include "monolocal/image.hpp"
#include "monolocal/imgproc.hpp"

namespace monolocal::overlay {

inline constexpr Rgb kGreen{0, 255, 0};
inline constexpr Rgb kBlue{0, 0, 255};
inline constexpr Rgb kYellow{255, 255, 0};
inline constexpr Rgb kRed{255, 0, 0};

void put(RasterImage& img, int x, int y, Rgb c);
void draw_segment(RasterImage& img, Point2 a, Point2 b, Rgb c);
// Full-width line, clipped to the image.
void draw_line(RasterImage& img, const LineRT& line, Rgb c);
void draw_cross(RasterImage& img, Point2 p, int half, Rgb c);
void draw_box(RasterImage& img, const RoiBox& box, Rgb c);

// l_F green, l_S blue, plate box yellow, anchor and C red. Everything in frame coordinates.
RasterImage footprint_overlay(const RasterImage& frame, const FootprintKeys& keys,
                              const std::optional<RoiBox>& plate_box);

}  // namespace monolocal::overlay
