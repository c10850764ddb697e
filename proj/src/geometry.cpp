#include "monolocal/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace monolocal {

double norm(WorldPoint a) { return std::hypot(a.x, a.y); }

namespace {

constexpr double kMinScale = 1e-12;

Eigen::Matrix3d gauge_fixed(const Eigen::Matrix3d& m) {
  const double f = m.norm();
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography is zero or not finite");
  }
  Eigen::Matrix3d out = m / f;
  double sign = 1.0;
  if (out(2, 2) < 0.0) {
    sign = -1.0;
  } else if (out(2, 2) == 0.0) {
    for (int i = 0; i < 9; ++i) {
      const double v = out(i / 3, i % 3);
      if (v != 0.0) {
        sign = v < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
  }
  return out * sign;
}

// Similarity taking the points to centroid 0 and RMS distance sqrt(2).
template <typename Get>
Eigen::Matrix3d normalizer(std::size_t n, Get get) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = get(i);
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = get(i);
    ss += (x - mx) * (x - mx) + (y - my) * (y - my);
  }
  const double rms = std::sqrt(ss / n);
  if (!(rms > 0.0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "all points coincide");
  }
  const double s = std::sqrt(2.0) / rms;
  Eigen::Matrix3d t;
  t << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
  return t;
}

bool collinear(WorldPoint a, WorldPoint b, WorldPoint c) {
  const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double scale = std::max({norm(b - a), norm(c - a), norm(c - b)});
  return std::abs(cross) <= 1e-9 * scale * scale;
}

}  // namespace

Homography Homography::identity() { return from_matrix(Eigen::Matrix3d::Identity()); }

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
  const Eigen::Matrix3d g = gauge_fixed(m);
  if (std::abs(g.determinant()) <= 1e-12) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography is not invertible");
  }
  Homography h;
  for (int i = 0; i < 9; ++i) h.h_[i] = g(i / 3, i % 3);
  const Eigen::Matrix3d inv = g.inverse();
  h.inverse_ = inv / inv.norm();
  return h;
}

Homography Homography::from_entries(const std::array<double, 9>& row_major) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = row_major[i];
  return from_matrix(m);
}

Eigen::Matrix3d Homography::matrix() const {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = h_[i];
  return m;
}

ImagePoint project(const Homography& h, WorldPoint p) {
  const auto& e = h.entries();
  const double u = e[0] * p.x + e[1] * p.y + e[2];
  const double v = e[3] * p.x + e[4] * p.y + e[5];
  const double w = e[6] * p.x + e[7] * p.y + e[8];
  if (std::abs(w) < kMinScale) throw Error(ErrorCode::PointAtInfinity, "world point maps to infinity");
  return {u / w, v / w};
}

WorldPoint unproject(const Homography& h, ImagePoint p) {
  const Eigen::Vector3d q = h.inverse() * Eigen::Vector3d(p.x, p.y, 1.0);
  if (std::abs(q.z()) < kMinScale) {
    throw Error(ErrorCode::PointAtInfinity, "image point lies on the horizon");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

double reprojection_error(const Homography& h, const Correspondence& c) {
  try {
    return norm(project(h, c.world) - c.image);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

Homography dlt_fit(std::span<const Correspondence> corrs) {
  const std::size_t n = corrs.size();
  if (n < 4) throw Error(ErrorCode::InsufficientData, "DLT needs at least 4 correspondences");

  const Eigen::Matrix3d tw = normalizer(n, [&](std::size_t i) {
    return std::pair{corrs[i].world.x, corrs[i].world.y};
  });
  const Eigen::Matrix3d ti = normalizer(n, [&](std::size_t i) {
    return std::pair{corrs[i].image.x, corrs[i].image.y};
  });

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d w = tw * Eigen::Vector3d(corrs[i].world.x, corrs[i].world.y, 1.0);
    const Eigen::Vector3d m = ti * Eigen::Vector3d(corrs[i].image.x, corrs[i].image.y, 1.0);
    const double x = w.x(), y = w.y(), u = m.x(), v = m.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 8 || sv(7) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "design matrix rank < 8");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography::from_matrix(ti.inverse() * hn * tw);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % range);
}

RansacResult ransac_fit(std::span<const Correspondence> corrs, const RansacParams& params) {
  const std::size_t n = corrs.size();
  if (n < 4) throw Error(ErrorCode::InsufficientData, "RANSAC needs at least 4 correspondences");
  if (!(params.inlier_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "inlier_px must be > 0");

  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> best;
  double best_mean = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> consensus;
  std::array<Correspondence, 4> sample;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4; ++k) {
      std::size_t candidate;
      do {
        candidate = uniform_index(rng, n);
      } while (std::find(idx.begin(), idx.begin() + k, candidate) != idx.begin() + k);
      idx[k] = candidate;
      sample[k] = corrs[candidate];
    }
    bool degenerate = false;
    for (int a = 0; a < 4 && !degenerate; ++a) {
      for (int b = a + 1; b < 4 && !degenerate; ++b) {
        for (int c = b + 1; c < 4; ++c) {
          if (collinear(sample[a].world, sample[b].world, sample[c].world)) {
            degenerate = true;
            break;
          }
        }
      }
    }
    if (degenerate) continue;

    std::optional<Homography> model;
    try {
      model = dlt_fit(sample);
    } catch (const Error&) {
      continue;
    }

    consensus.clear();
    double err_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = reprojection_error(*model, corrs[i]);
      if (e <= params.inlier_px) {
        consensus.push_back(i);
        err_sum += e;
      }
    }
    const double mean = consensus.empty() ? 0.0 : err_sum / consensus.size();
    if (consensus.size() > best.size() || (consensus.size() == best.size() && mean < best_mean)) {
      best = consensus;
      best_mean = mean;
    }
  }

  if (best.size() < 4) throw Error(ErrorCode::NoConsensus, "no model with >= 4 inliers");
  std::vector<Correspondence> inliers;
  inliers.reserve(best.size());
  for (std::size_t i : best) inliers.push_back(corrs[i]);
  return {dlt_fit(inliers), best};
}

std::vector<Correspondence> parse_correspondences(const std::string& text) {
  std::vector<Correspondence> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad number '" + token + "'");
      }
    }
    if (values.empty()) continue;
    if (values.size() != 4) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                      std::to_string(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-finite value");
      }
    }
    out.push_back({{values[0], values[1]}, {values[2], values[3]}});
  }
  return out;
}

std::vector<Correspondence> read_correspondences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_correspondences(buf.str());
}

}  // namespace monolocal
