#include "monolocal/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace monolocal::overlay {

void put(RasterImage& img, int x, int y, Rgb c) {
  if (!img.contains(x, y)) return;
  if (img.channels() == 1) {
    img.at(x, y) = static_cast<std::uint8_t>((299 * c.r + 587 * c.g + 114 * c.b + 500) / 1000);
    return;
  }
  img.at(x, y, 0) = c.r;
  img.at(x, y, 1) = c.g;
  img.at(x, y, 2) = c.b;
}

void draw_segment(RasterImage& img, Point2 a, Point2 b, Rgb c) {
  const double len = norm(b - a);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  for (int i = 0; i <= steps; ++i) {
    const Point2 p = a + (static_cast<double>(i) / steps) * (b - a);
    put(img, static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)), c);
  }
}

void draw_line(RasterImage& img, const LineRT& line, Rgb c) {
  const Point2 mid = line.closest_point({img.width() / 2.0, img.height() / 2.0});
  const double reach = std::hypot(img.width(), img.height());
  draw_segment(img, mid - reach * line.direction(), mid + reach * line.direction(), c);
}

void draw_cross(RasterImage& img, Point2 p, int half, Rgb c) {
  draw_segment(img, p - Point2{double(half), double(half)}, p + Point2{double(half), double(half)}, c);
  draw_segment(img, p - Point2{double(half), double(-half)}, p + Point2{double(half), double(-half)}, c);
}

void draw_box(RasterImage& img, const RoiBox& box, Rgb c) {
  const double x0 = box.x, y0 = box.y, x1 = box.x + box.w - 1, y1 = box.y + box.h - 1;
  draw_segment(img, {x0, y0}, {x1, y0}, c);
  draw_segment(img, {x1, y0}, {x1, y1}, c);
  draw_segment(img, {x1, y1}, {x0, y1}, c);
  draw_segment(img, {x0, y1}, {x0, y0}, c);
}

RasterImage footprint_overlay(const RasterImage& frame, const FootprintKeys& keys,
                              const std::optional<RoiBox>& plate_box) {
  RasterImage out = frame;
  draw_line(out, keys.lines.l_F, kGreen);
  draw_line(out, keys.lines.l_S, kBlue);
  if (plate_box) draw_box(out, *plate_box, kYellow);
  draw_cross(out, keys.anchor, 6, kRed);
  draw_cross(out, keys.C, 6, kRed);
  return out;
}

}  // namespace monolocal::overlay
