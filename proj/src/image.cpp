#include "monolocal/image.hpp"

#include <algorithm>

namespace monolocal {

RasterImage crop(const RasterImage& img, const RoiBox& box) {
  if (box.w < 1 || box.h < 1 || box.x < 0 || box.y < 0 || box.x + box.w > img.width() ||
      box.y + box.h > img.height()) {
    throw Error(ErrorCode::InvalidArgument, "crop box outside image");
  }
  RasterImage out(box.w, box.h, img.channels());
  const std::size_t span = static_cast<std::size_t>(box.w) * img.channels();
  for (int y = 0; y < box.h; ++y) {
    auto src = img.row(box.y + y).subspan(static_cast<std::size_t>(box.x) * img.channels(), span);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

std::size_t count_nonzero(const RasterImage& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.data().begin(), mask.data().end(), [](std::uint8_t v) { return v != 0; }));
}

}  // namespace monolocal
