#include "monolocal/background.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "monolocal/imgproc.hpp"

namespace monolocal {

void BackgroundParams::validate() const {
  if (components < 1 || components > 16) {
    throw Error(ErrorCode::InvalidArgument, "mixture component count must be in [1, 16]");
  }
  if (!(learning_rate > 0.0f && learning_rate <= 1.0f)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be in (0, 1]");
  }
  if (!(match_k > 0.0f) || !(var_min > 0.0f) || !(var_init >= var_min)) {
    throw Error(ErrorCode::InvalidArgument, "match_k, var_min must be > 0 and var_init >= var_min");
  }
  if (!(bg_weight_threshold > 0.0f && bg_weight_threshold < 1.0f) ||
      !(weight_new > 0.0f && weight_new < 1.0f)) {
    throw Error(ErrorCode::InvalidArgument, "weight thresholds must be in (0, 1)");
  }
  if (!(shadow_v_lo < shadow_v_hi)) {
    throw Error(ErrorCode::InvalidThresholds, "shadow value band is empty");
  }
}

BackgroundModel::BackgroundModel(int width, int height, int channels, const BackgroundParams& params)
    : width_(width), height_(height), channels_(channels), k_(params.components), params_(params) {
  params.validate();
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "model dimensions must be >= 1");
  if (channels != 1 && channels != 3) throw Error(ErrorCode::InvalidChannels, "model needs 1 or 3 channels");
  const std::size_t slots = static_cast<std::size_t>(width) * height * k_;
  weight_.assign(slots, 0.0f);
  variance_.assign(slots, params.var_init);
  mean_.assign(slots * channels, 0.0f);
  for (std::size_t p = 0; p < static_cast<std::size_t>(width) * height; ++p) weight_[slot(p, 0)] = 1.0f;
}

PixelMixture BackgroundModel::mixture(int x, int y) const {
  const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
  PixelMixture m;
  for (int k = 0; k < k_; ++k) {
    const std::size_t s = slot(p, k);
    m.weight.push_back(weight_[s]);
    m.variance.push_back(variance_[s]);
    m.mean.emplace_back(mean_.begin() + s * channels_, mean_.begin() + (s + 1) * channels_);
  }
  return m;
}

RasterImage BackgroundModel::dominant_background() const {
  RasterImage out(width_, height_, channels_);
  auto dst = out.data();
  for (std::size_t p = 0; p < static_cast<std::size_t>(width_) * height_; ++p) {
    int best = 0;
    for (int k = 1; k < k_; ++k) {
      if (weight_[slot(p, k)] > weight_[slot(p, best)]) best = k;
    }
    const float* mu = &mean_[slot(p, best) * channels_];
    for (int c = 0; c < channels_; ++c) {
      dst[p * channels_ + c] =
          static_cast<std::uint8_t>(std::clamp(std::lround(mu[c]), 0L, 255L));
    }
  }
  return out;
}

RasterImage BackgroundModel::segment(const RasterImage& frame) {
  if (frame.width() != width_ || frame.height() != height_ || frame.channels() != channels_) {
    throw Error(ErrorCode::DimensionMismatch, "frame does not match background model");
  }
  RasterImage mask(width_, height_, 1);
  const auto src = frame.data();
  auto out = mask.data();
  const float alpha = params_.learning_rate;
  const float k2 = params_.match_k * params_.match_k;
  std::array<int, 16> order{};
  std::array<bool, 16> is_bg{};

  for (std::size_t p = 0; p < static_cast<std::size_t>(width_) * height_; ++p) {
    float* w = &weight_[slot(p, 0)];
    float* var = &variance_[slot(p, 0)];
    float* mu = &mean_[slot(p, 0) * channels_];
    const std::uint8_t* x = &src[p * channels_];

    std::iota(order.begin(), order.begin() + k_, 0);
    std::stable_sort(order.begin(), order.begin() + k_, [&](int a, int b) {
      return w[a] / std::sqrt(var[a]) > w[b] / std::sqrt(var[b]);
    });
    std::fill(is_bg.begin(), is_bg.end(), false);
    double cum = 0.0;
    for (int i = 0; i < k_; ++i) {
      is_bg[order[i]] = true;
      cum += w[order[i]];
      if (cum > params_.bg_weight_threshold) break;
    }

    int matched = -1;
    for (int i = 0; i < k_ && matched < 0; ++i) {
      const int k = order[i];
      bool ok = true;
      for (int c = 0; c < channels_ && ok; ++c) {
        const float d = static_cast<float>(x[c]) - mu[k * channels_ + c];
        ok = d * d <= k2 * var[k];
      }
      if (ok) matched = k;
    }

    if (matched >= 0) {
      out[p] = is_bg[matched] ? 0 : 255;
      const float rho = alpha / std::max(w[matched], alpha);
      float d2 = 0.0f;
      for (int c = 0; c < channels_; ++c) {
        float& m = mu[matched * channels_ + c];
        m += rho * (static_cast<float>(x[c]) - m);
        const float d = static_cast<float>(x[c]) - m;
        d2 += d * d;
      }
      d2 /= static_cast<float>(channels_);
      var[matched] = std::max((1.0f - rho) * var[matched] + rho * d2, params_.var_min);
      for (int k = 0; k < k_; ++k) w[k] = (1.0f - alpha) * w[k] + (k == matched ? alpha : 0.0f);
    } else {
      out[p] = 255;
      int weakest = 0;
      for (int k = 0; k < k_; ++k) {
        w[k] *= 1.0f - alpha;
        if (w[k] < w[weakest]) weakest = k;
      }
      w[weakest] = params_.weight_new;
      var[weakest] = params_.var_init;
      for (int c = 0; c < channels_; ++c) mu[weakest * channels_ + c] = x[c];
    }

    double sum = 0.0;
    for (int k = 0; k < k_; ++k) sum += w[k];
    for (int k = 0; k < k_; ++k) w[k] = static_cast<float>(w[k] / sum);
  }
  return mask;
}

BootstrapAccumulator::BootstrapAccumulator(const BackgroundParams& params) : params_(params) {
  params.validate();
}

void BootstrapAccumulator::add(const RasterImage& frame) {
  if (count_ == 0) {
    if (frame.empty()) throw Error(ErrorCode::InvalidArgument, "empty bootstrap frame");
    width_ = frame.width();
    height_ = frame.height();
    channels_ = frame.channels();
    sum_.assign(frame.data().size(), 0.0);
    sum_sq_.assign(frame.data().size(), 0.0);
  } else if (frame.width() != width_ || frame.height() != height_ || frame.channels() != channels_) {
    throw Error(ErrorCode::DimensionMismatch, "bootstrap frames differ in shape");
  }
  const auto d = frame.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum_[i] += d[i];
    sum_sq_[i] += static_cast<double>(d[i]) * d[i];
  }
  ++count_;
}

BackgroundModel BootstrapAccumulator::finish() const {
  if (count_ == 0) throw Error(ErrorCode::InsufficientData, "bootstrap needs at least one frame");
  BackgroundModel model(width_, height_, channels_, params_);
  const int ch = channels_;
  const double n = static_cast<double>(count_);
  for (std::size_t p = 0; p < static_cast<std::size_t>(width_) * height_; ++p) {
    double var = 0.0;
    for (int c = 0; c < ch; ++c) {
      const double m = sum_[p * ch + c] / n;
      model.mean_[model.slot(p, 0) * ch + c] = static_cast<float>(m);
      var += std::max(0.0, sum_sq_[p * ch + c] / n - m * m);
    }
    var /= ch;
    // One frame carries no spread information, so start from the wide prior.
    if (count_ == 1) var = params_.var_init;
    model.variance_[model.slot(p, 0)] = std::max(static_cast<float>(var), params_.var_min);
  }
  return model;
}

BackgroundModel bootstrap(std::span<const RasterImage> frames, const BackgroundParams& params) {
  if (frames.empty()) throw Error(ErrorCode::InsufficientData, "bootstrap needs at least one frame");
  BootstrapAccumulator acc(params);
  for (const auto& f : frames) acc.add(f);
  return acc.finish();
}

namespace {

int hue_distance(int a, int b) {
  const int d = std::abs(a - b) % 180;
  return std::min(d, 180 - d);
}

constexpr char kMagic[4] = {'G', 'M', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(out, v);
}

struct Reader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > bytes.size()) throw Error(ErrorCode::ParseError, "background snapshot truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  float f32() {
    const std::uint32_t v = u32();
    float f;
    std::memcpy(&f, &v, 4);
    return f;
  }
};

}  // namespace

RasterImage remove_shadow(const RasterImage& frame, const RasterImage& mask,
                          const BackgroundModel& model) {
  if (frame.channels() != 3) throw Error(ErrorCode::InvalidChannels, "shadow removal needs RGB");
  if (mask.width() != frame.width() || mask.height() != frame.height() || mask.channels() != 1 ||
      model.width() != frame.width() || model.height() != frame.height() ||
      model.channels() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "frame, mask and model must match");
  }
  const auto& prm = model.params();
  const RasterImage bg = model.dominant_background();
  RasterImage out = mask;
  const auto f = frame.data();
  const auto b = bg.data();
  auto o = out.data();
  for (std::size_t p = 0; p < frame.pixel_count(); ++p) {
    if (o[p] == 0) continue;
    const auto hf = rgb_to_hsv_pixel(f[3 * p], f[3 * p + 1], f[3 * p + 2]);
    const auto hb = rgb_to_hsv_pixel(b[3 * p], b[3 * p + 1], b[3 * p + 2]);
    if (hb[2] == 0) continue;
    const float ratio = static_cast<float>(hf[2]) / hb[2];
    if (ratio >= prm.shadow_v_lo && ratio <= prm.shadow_v_hi &&
        std::abs(hf[1] - hb[1]) <= prm.shadow_s_tol &&
        hue_distance(hf[0], hb[0]) <= prm.shadow_h_tol) {
      o[p] = 0;
    }
  }
  return out;
}

std::optional<RoiBox> extract_roi(const RasterImage& mask, std::size_t min_area) {
  const auto blobs = connected_components(mask);
  const Blob* best = nullptr;
  for (const auto& b : blobs) {
    if (!best || b.area > best->area) best = &b;
  }
  if (!best || best->area < min_area || best->area == 0) return std::nullopt;
  const int w = best->x_max - best->x_min + 1;
  const int h = best->y_max - best->y_min + 1;
  const int gx = static_cast<int>(std::lround(0.1 * w));
  const int gy = static_cast<int>(std::lround(0.1 * h));
  const int x0 = std::max(0, best->x_min - gx);
  const int y0 = std::max(0, best->y_min - gy);
  const int x1 = std::min(mask.width() - 1, best->x_max + gx);
  const int y1 = std::min(mask.height() - 1, best->y_max + gy);
  return RoiBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

std::vector<std::uint8_t> BackgroundModel::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(24 + weight_.size() * (2 + channels_) * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(width_));
  put_u32(out, static_cast<std::uint32_t>(height_));
  put_u32(out, static_cast<std::uint32_t>(channels_));
  put_u32(out, static_cast<std::uint32_t>(k_));
  for (std::size_t s = 0; s < weight_.size(); ++s) {
    put_f32(out, weight_[s]);
    put_f32(out, variance_[s]);
    for (int c = 0; c < channels_; ++c) put_f32(out, mean_[s * channels_ + c]);
  }
  return out;
}

BackgroundModel BackgroundModel::deserialize(std::span<const std::uint8_t> bytes,
                                             const BackgroundParams& params) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::ParseError, "not a background snapshot (bad magic)");
  }
  Reader r{bytes, 4};
  if (const auto v = r.u32(); v != kVersion) {
    throw Error(ErrorCode::ParseError, "unsupported background snapshot version " + std::to_string(v));
  }
  const auto w = r.u32(), h = r.u32(), c = r.u32(), k = r.u32();
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16 || k == 0 || k > 16) {
    throw Error(ErrorCode::ParseError, "background snapshot has invalid dimensions");
  }
  BackgroundParams prm = params;
  prm.components = static_cast<int>(k);
  BackgroundModel m(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), prm);
  const std::size_t expected = 24 + m.weight_.size() * (2 + c) * 4;
  if (bytes.size() != expected) throw Error(ErrorCode::ParseError, "background snapshot size mismatch");
  for (std::size_t s = 0; s < m.weight_.size(); ++s) {
    m.weight_[s] = r.f32();
    m.variance_[s] = r.f32();
    for (std::uint32_t ch = 0; ch < c; ++ch) m.mean_[s * c + ch] = r.f32();
  }
  return m;
}

void BackgroundModel::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

BackgroundModel BackgroundModel::load(const std::filesystem::path& path, const BackgroundParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  return deserialize(bytes, params);
}

}  // namespace monolocal
