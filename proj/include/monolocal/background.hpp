#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monolocal/image.hpp"

namespace monolocal {

struct BackgroundParams {
  int components = 3;
  float learning_rate = 0.01f;
  float match_k = 2.5f;
  float bg_weight_threshold = 0.7f;
  float weight_new = 0.05f;
  float var_init = 225.0f;
  float var_min = 4.0f;

  // Shadow band, relative to the dominant background mean in HSV.
  float shadow_v_lo = 0.5f;
  float shadow_v_hi = 0.95f;
  int shadow_s_tol = 60;
  int shadow_h_tol = 30;

  void validate() const;
  friend bool operator==(const BackgroundParams&, const BackgroundParams&) = default;
};

// Read-only view of one pixel's mixture, for tests and debugging.
struct PixelMixture {
  std::vector<float> weight;
  std::vector<float> variance;
  std::vector<std::vector<float>> mean;  // [component][channel]
};

class BackgroundModel {
 public:
  BackgroundModel(int width, int height, int channels, const BackgroundParams& params = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  int components() const noexcept { return k_; }
  const BackgroundParams& params() const noexcept { return params_; }

  PixelMixture mixture(int x, int y) const;
  // Mean of the highest-weight component, rounded to 8 bits.
  RasterImage dominant_background() const;

  // One update step; returns the binary foreground mask (0/255).
  RasterImage segment(const RasterImage& frame);

  void save(const std::filesystem::path& path) const;
  std::vector<std::uint8_t> serialize() const;
  static BackgroundModel load(const std::filesystem::path& path, const BackgroundParams& params = {});
  static BackgroundModel deserialize(std::span<const std::uint8_t> bytes,
                                     const BackgroundParams& params = {});

  friend bool operator==(const BackgroundModel&, const BackgroundModel&) = default;

 private:
  friend class BootstrapAccumulator;

  std::size_t slot(std::size_t pixel, int k) const noexcept { return pixel * k_ + k; }

  int width_ = 0, height_ = 0, channels_ = 0, k_ = 0;
  BackgroundParams params_;
  std::vector<float> weight_;    // pixel * K + k
  std::vector<float> variance_;  // pixel * K + k
  std::vector<float> mean_;      // (pixel * K + k) * channels + c
};

// Per-pixel mean and spread over a run of frames, accumulated one frame at a time.
class BootstrapAccumulator {
 public:
  explicit BootstrapAccumulator(const BackgroundParams& params = {});
  void add(const RasterImage& frame);
  std::size_t count() const noexcept { return count_; }
  BackgroundModel finish() const;

 private:
  BackgroundParams params_;
  int width_ = 0, height_ = 0, channels_ = 0;
  std::size_t count_ = 0;
  std::vector<double> sum_, sum_sq_;
};

BackgroundModel bootstrap(std::span<const RasterImage> frames, const BackgroundParams& params = {});

RasterImage remove_shadow(const RasterImage& frame, const RasterImage& mask,
                          const BackgroundModel& model);

// Largest blob's bounding box grown by 10% of each side length on every side.
std::optional<RoiBox> extract_roi(const RasterImage& mask, std::size_t min_area);

}  // namespace monolocal
