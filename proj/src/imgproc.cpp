#include "monolocal/imgproc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>

namespace monolocal {

namespace {

constexpr double kPi = std::numbers::pi;

void require_channels(const RasterImage& img, int channels, const char* op) {
  if (img.channels() != channels) {
    throw Error(ErrorCode::InvalidChannels,
                std::string(op) + " expects " + std::to_string(channels) + "-channel input");
  }
}

// Wraps theta into [0, pi), flipping rho when a half turn is removed.
void normalize_polar(double& theta, double& rho) {
  while (theta < 0.0) {
    theta += kPi;
    rho = -rho;
  }
  while (theta >= kPi) {
    theta -= kPi;
    rho = -rho;
  }
}

}  // namespace

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double norm(Point2 a) { return std::hypot(a.x, a.y); }

Point2 LineRT::normal() const { return {std::cos(theta), std::sin(theta)}; }
Point2 LineRT::direction() const { return {-std::sin(theta), std::cos(theta)}; }

Point2 LineRT::closest_point(Point2 p) const {
  return p - signed_distance(p) * normal();
}

LineRT LineRT::from_normal(double theta, double rho, int votes) {
  normalize_polar(theta, rho);
  return {rho, theta, votes};
}

LineRT LineRT::through(Point2 p, Point2 direction, int votes) {
  const double theta = std::atan2(direction.y, direction.x) + kPi / 2.0;
  const Point2 n{std::cos(theta), std::sin(theta)};
  return from_normal(theta, dot(n, p), votes);
}

LineRT LineRT::translated(Point2 offset) const {
  return {rho + dot(normal(), offset), theta, votes};
}

std::optional<Point2> intersect(const LineRT& a, const LineRT& b) {
  const Point2 na = a.normal(), nb = b.normal();
  const double det = na.x * nb.y - na.y * nb.x;
  if (std::abs(det) < 1e-12) return std::nullopt;
  return Point2{(a.rho * nb.y - b.rho * na.y) / det, (na.x * b.rho - nb.x * a.rho) / det};
}

double line_angle_difference(double theta_a, double theta_b) {
  double d = std::fmod(std::abs(theta_a - theta_b), kPi);
  return std::min(d, kPi - d);
}

double circular_mean_pi(const std::vector<double>& thetas) {
  double s = 0.0, c = 0.0;
  for (double t : thetas) {
    s += std::sin(2.0 * t);
    c += std::cos(2.0 * t);
  }
  double mean = 0.5 * std::atan2(s, c);
  if (mean < 0.0) mean += kPi;
  if (mean >= kPi) mean -= kPi;
  return mean;
}

RasterImage to_grayscale(const RasterImage& rgb) {
  require_channels(rgb, 3, "to_grayscale");
  RasterImage gray(rgb.width(), rgb.height(), 1);
  kernels::active().rgb_to_gray(rgb.data().data(), gray.data().data(), rgb.pixel_count());
  return gray;
}

std::array<std::uint8_t, 3> rgb_to_hsv_pixel(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const int r = r8, g = g8, b = b8;
  const int v = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int diff = v - mn;
  const int s = v == 0 ? 0 : static_cast<int>(std::lround(255.0 * diff / v));
  double h = 0.0;
  if (diff != 0) {
    if (v == r) {
      h = 60.0 * (g - b) / diff;
    } else if (v == g) {
      h = 120.0 + 60.0 * (b - r) / diff;
    } else {
      h = 240.0 + 60.0 * (r - g) / diff;
    }
    if (h < 0.0) h += 360.0;
  }
  int h8 = static_cast<int>(std::lround(h / 2.0));
  if (h8 >= 180) h8 -= 180;
  return {static_cast<std::uint8_t>(h8), static_cast<std::uint8_t>(s),
          static_cast<std::uint8_t>(v)};
}

RasterImage to_hsv(const RasterImage& rgb) {
  require_channels(rgb, 3, "to_hsv");
  RasterImage out(rgb.width(), rgb.height(), 3);
  const auto src = rgb.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < rgb.pixel_count(); ++i) {
    const auto hsv = rgb_to_hsv_pixel(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
    dst[3 * i] = hsv[0];
    dst[3 * i + 1] = hsv[1];
    dst[3 * i + 2] = hsv[2];
  }
  return out;
}

RasterImage hsv_to_rgb(const RasterImage& hsv) {
  require_channels(hsv, 3, "hsv_to_rgb");
  RasterImage out(hsv.width(), hsv.height(), 3);
  const auto src = hsv.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < hsv.pixel_count(); ++i) {
    const double h = 2.0 * src[3 * i];
    const double s = src[3 * i + 1] / 255.0;
    const double v = src[3 * i + 2];
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp) % 6) {
      case 0: r = c; g = x; break;
      case 1: r = x; g = c; break;
      case 2: g = c; b = x; break;
      case 3: g = x; b = c; break;
      case 4: r = x; b = c; break;
      default: r = c; b = x; break;
    }
    const double m = v - c;
    auto to8 = [](double val) {
      return static_cast<std::uint8_t>(std::clamp<long>(std::lround(val), 0, 255));
    };
    dst[3 * i] = to8(r + m);
    dst[3 * i + 1] = to8(g + m);
    dst[3 * i + 2] = to8(b + m);
  }
  return out;
}

FloatImage gaussian_blur(const RasterImage& gray, float sigma) {
  require_channels(gray, 1, "gaussian_blur");
  if (!(sigma > 0.0f)) throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be > 0");
  constexpr int radius = 2;
  std::array<float, 2 * radius + 1> taps{};
  {
    std::array<double, 2 * radius + 1> w{};
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      w[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
      sum += w[k + radius];
    }
    for (std::size_t i = 0; i < w.size(); ++i) taps[i] = static_cast<float>(w[i] / sum);
  }

  const auto& kt = kernels::active();
  const int w = gray.width(), h = gray.height();
  FloatImage horizontal(w, h, 1);
  for (int y = 0; y < h; ++y) {
    kt.convolve_row_u8(gray.row(y).data(), horizontal.row(y).data(), w, taps.data(), radius);
  }
  FloatImage out(w, h, 1);
  std::array<const float*, 2 * radius + 1> rows{};
  for (int y = 0; y < h; ++y) {
    for (int k = 0; k <= 2 * radius; ++k) {
      const int yy = std::clamp(y + k - radius, 0, h - 1);
      rows[k] = horizontal.row(yy).data();
    }
    kt.convolve_cols(rows.data(), out.row(y).data(), w, taps.data(), radius);
  }
  return out;
}

Gradients sobel(const FloatImage& img) {
  const int w = img.width(), h = img.height();
  Gradients g{FloatImage(w, h, 1), FloatImage(w, h, 1), FloatImage(w, h, 1)};
  const auto& kt = kernels::active();
  for (int y = 0; y < h; ++y) {
    const float* up = img.row(std::max(y - 1, 0)).data();
    const float* mid = img.row(y).data();
    const float* down = img.row(std::min(y + 1, h - 1)).data();
    kt.sobel_row(up, mid, down, g.gx.row(y).data(), g.gy.row(y).data(),
                 g.magnitude.row(y).data(), w);
  }
  return g;
}

Gradients canny_gradients(const RasterImage& gray, float sigma) {
  require_channels(gray, 1, "canny");
  return sobel(gaussian_blur(gray, sigma));
}

RasterImage canny(const RasterImage& gray, const CannyParams& params) {
  if (!(params.low < params.high)) {
    throw Error(ErrorCode::InvalidThresholds, "canny requires low < high");
  }
  const Gradients g = canny_gradients(gray, params.sigma);
  const int w = gray.width(), h = gray.height();

  // Non-maximum suppression along the quantized gradient direction. Ties keep
  // the pixel on the lower-index side so plateaus stay one pixel wide.
  RasterImage nms(w, h, 1);
  auto mag = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0f : g.magnitude.at(x, y);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float m = g.magnitude.at(x, y);
      if (m < params.low || m == 0.0f) continue;
      const float gx = g.gx.at(x, y), gy = g.gy.at(x, y);
      double angle = std::atan2(gy, gx) * 180.0 / kPi;
      if (angle < 0) angle += 180.0;
      int dx = 0, dy = 0;
      if (angle < 22.5 || angle >= 157.5) {
        dx = 1;
      } else if (angle < 67.5) {
        dx = 1;
        dy = 1;
      } else if (angle < 112.5) {
        dy = 1;
      } else {
        dx = -1;
        dy = 1;
      }
      const float before = mag(x - dx, y - dy);
      const float after = mag(x + dx, y + dy);
      if (m > before && m >= after) nms.at(x, y) = 1;
    }
  }

  RasterImage edges(w, h, 1);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (nms.at(x, y) && g.magnitude.at(x, y) >= params.high) {
        edges.at(x, y) = 255;
        queue.emplace_back(x, y);
      }
    }
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (!edges.contains(nx, ny) || edges.at(nx, ny) || !nms.at(nx, ny)) continue;
        edges.at(nx, ny) = 255;
        queue.emplace_back(nx, ny);
      }
    }
  }
  return edges;
}

std::vector<LineRT> hough_lines(const RasterImage& edges, const HoughParams& params) {
  require_channels(edges, 1, "hough_lines");
  if (!(params.rho_res > 0.0) || !(params.theta_res > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "hough resolutions must be > 0");
  }
  const int w = edges.width(), h = edges.height();
  const int n_theta = std::max(1, static_cast<int>(std::lround(kPi / params.theta_res)));
  const double diag = std::hypot(static_cast<double>(w), static_cast<double>(h));
  const int offset = static_cast<int>(std::ceil(diag / params.rho_res)) + 1;
  const int n_rho = 2 * offset + 1;

  std::vector<double> cos_t(n_theta), sin_t(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    cos_t[i] = std::cos(i * params.theta_res) / params.rho_res;
    sin_t[i] = std::sin(i * params.theta_res) / params.rho_res;
  }

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  bool any = false;
  for (int y = 0; y < h; ++y) {
    const auto row = edges.row(y);
    for (int x = 0; x < w; ++x) {
      if (!row[x]) continue;
      any = true;
      for (int i = 0; i < n_theta; ++i) {
        const int r = static_cast<int>(std::lround(x * cos_t[i] + y * sin_t[i])) + offset;
        ++acc[static_cast<std::size_t>(i) * n_rho + r];
      }
    }
  }
  if (!any) return {};

  // Neighbour lookup with theta wrap: (theta + pi, rho) == (theta, -rho).
  auto at = [&](int i, int r) -> int {
    if (i < 0) {
      i += n_theta;
      r = 2 * offset - r;
    } else if (i >= n_theta) {
      i -= n_theta;
      r = 2 * offset - r;
    }
    if (r < 0 || r >= n_rho) return 0;
    return acc[static_cast<std::size_t>(i) * n_rho + r];
  };

  std::vector<LineRT> lines;
  for (int i = 0; i < n_theta; ++i) {
    for (int r = 0; r < n_rho; ++r) {
      const int v = acc[static_cast<std::size_t>(i) * n_rho + r];
      if (v < params.vote_threshold || v == 0) continue;
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (di == 0 && dr == 0) continue;
          const int nv = at(i + di, r + dr);
          const bool precedes = di < 0 || (di == 0 && dr < 0);
          if (precedes ? nv >= v : nv > v) {
            peak = false;
            break;
          }
        }
      }
      if (peak) lines.push_back({(r - offset) * params.rho_res, i * params.theta_res, v});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const LineRT& a, const LineRT& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.theta != b.theta) return a.theta < b.theta;
    return a.rho < b.rho;
  });
  return lines;
}

LabeledBlobs label_components(const RasterImage& mask, int connectivity) {
  require_channels(mask, 1, "connected_components");
  if (connectivity != 4 && connectivity != 8) {
    throw Error(ErrorCode::InvalidArgument, "connectivity must be 4 or 8");
  }
  const int w = mask.width(), h = mask.height();
  LabeledBlobs out{Image<std::int32_t>(w, h, 1), {}};

  // Two-pass labelling with union-find over provisional labels.
  std::vector<std::int32_t> parent{0};
  auto find = [&](std::int32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  auto unite = [&](std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::int32_t label = 0;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        const std::int32_t l = out.labels.at(nx, ny);
        if (!l) return;
        if (!label) {
          label = l;
        } else {
          unite(label, l);
        }
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (connectivity == 8) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      if (!label) {
        label = static_cast<std::int32_t>(parent.size());
        parent.push_back(label);
      }
      out.labels.at(x, y) = label;
    }
  }

  std::vector<std::int32_t> final_label(parent.size(), 0);
  std::vector<double> sx, sy;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int32_t& l = out.labels.at(x, y);
      if (!l) continue;
      const std::int32_t root = find(l);
      if (!final_label[root]) {
        final_label[root] = static_cast<std::int32_t>(out.blobs.size()) + 1;
        out.blobs.push_back({final_label[root], 0, x, y, x, y, {}});
        sx.push_back(0.0);
        sy.push_back(0.0);
      }
      l = final_label[root];
      Blob& b = out.blobs[l - 1];
      ++b.area;
      b.x_min = std::min(b.x_min, x);
      b.x_max = std::max(b.x_max, x);
      b.y_min = std::min(b.y_min, y);
      b.y_max = std::max(b.y_max, y);
      sx[l - 1] += x;
      sy[l - 1] += y;
    }
  }
  for (std::size_t i = 0; i < out.blobs.size(); ++i) {
    const double n = static_cast<double>(out.blobs[i].area);
    out.blobs[i].centroid = {sx[i] / n, sy[i] / n};
  }
  return out;
}

std::vector<Blob> connected_components(const RasterImage& mask, int connectivity) {
  return label_components(mask, connectivity).blobs;
}

RasterImage color_mask(const RasterImage& hsv, const HsvBand& band) {
  require_channels(hsv, 3, "color_mask");
  RasterImage mask(hsv.width(), hsv.height(), 1);
  kernels::active().hsv_in_range(hsv.data().data(), mask.data().data(), hsv.pixel_count(), band);
  return mask;
}

std::vector<BoundaryPoint> boundary_points(const RasterImage& mask) {
  require_channels(mask, 1, "boundary_points");
  std::vector<BoundaryPoint> out;
  const int w = mask.width(), h = mask.height();
  constexpr int steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      for (const auto& s : steps) {
        const int nx = x + s[0], ny = y + s[1];
        if (!mask.contains(nx, ny) || mask.at(nx, ny)) continue;
        out.push_back({{x + 0.5 * s[0], y + 0.5 * s[1]},
                       {static_cast<double>(s[0]), static_cast<double>(s[1])}});
      }
    }
  }
  return out;
}

std::optional<LineRT> fit_line(const std::vector<Point2>& points) {
  if (points.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= points.size();
  my /= points.size();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector2d d(p.x - mx, p.y - my);
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  if (eig.eigenvalues()(1) <= 0.0) return std::nullopt;
  const Eigen::Vector2d n = eig.eigenvectors().col(0);
  const double theta = std::atan2(n.y(), n.x());
  return LineRT::from_normal(theta, n.x() * mx + n.y() * my);
}

std::optional<LineRT> refine_line_to_boundary(const LineRT& line,
                                              const std::vector<BoundaryPoint>& boundary,
                                              double band, Point2 outward_hint, int iterations) {
  const double hint_norm = norm(outward_hint);
  LineRT current = line;
  bool fitted = false;
  std::vector<Point2> selected;
  for (int it = 0; it < iterations; ++it) {
    selected.clear();
    for (const auto& b : boundary) {
      if (std::abs(current.signed_distance(b.position)) > band) continue;
      if (hint_norm > 0.0 && dot(b.outward, outward_hint) <= 0.0) continue;
      selected.push_back(b.position);
    }
    auto fit = fit_line(selected);
    if (!fit) break;
    std::vector<Point2> trimmed;
    for (const auto& p : selected) {
      if (std::abs(fit->signed_distance(p)) <= 1.0) trimmed.push_back(p);
    }
    if (trimmed.size() >= 2) {
      if (auto again = fit_line(trimmed)) fit = again;
    }
    current = LineRT{fit->rho, fit->theta, line.votes};
    fitted = true;
  }
  if (!fitted) return std::nullopt;
  return current;
}

std::optional<LineRT> refine_segment_to_boundary(const LineRT& line, Point2 end_a, Point2 end_b,
                                                 Point2 inside,
                                                 const std::vector<BoundaryPoint>& boundary,
                                                 double band, double margin) {
  const Point2 n = line.normal();
  const Point2 hint = line.signed_distance(inside) < 0.0 ? n : -1.0 * n;
  const Point2 dir = line.direction();
  double ta = dot(dir, end_a), tb = dot(dir, end_b);
  if (ta > tb) std::swap(ta, tb);
  margin = std::min(margin, 0.25 * (tb - ta));
  std::vector<Point2> pts;
  for (const auto& b : boundary) {
    if (std::abs(line.signed_distance(b.position)) > band) continue;
    if (dot(b.outward, hint) <= 0.0) continue;
    const double t = dot(dir, b.position);
    if (t < ta + margin || t > tb - margin) continue;
    pts.push_back(b.position);
  }
  auto fit = fit_line(pts);
  if (!fit) return std::nullopt;
  std::vector<Point2> kept;
  for (const auto& p : pts) {
    if (std::abs(fit->signed_distance(p)) <= 1.0) kept.push_back(p);
  }
  if (kept.size() >= 2) {
    if (auto again = fit_line(kept)) fit = again;
  }
  fit->votes = line.votes;
  return fit;
}

}  // namespace monolocal
