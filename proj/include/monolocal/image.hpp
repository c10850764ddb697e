#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "monolocal/error.hpp"

namespace monolocal {

// Owned row-major pixel grid. Channels are interleaved (RGBRGB...).
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;

  Image(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
    }
    if (channels != 1 && channels != 3) {
      throw Error(ErrorCode::InvalidChannels, "image must have 1 or 3 channels");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::span<T> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }

  T& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using RasterImage = Image<std::uint8_t>;
using FloatImage = Image<float>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Axis-aligned pixel rectangle; also the vehicle ROI.
struct RoiBox {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

RasterImage crop(const RasterImage& img, const RoiBox& box);

// Binary masks hold 0 or 255.
std::size_t count_nonzero(const RasterImage& mask);

}  // namespace monolocal
