#include "monolocal/config.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace monolocal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

HsvBand parse_band(const Config& cfg, const std::string& key, const HsvBand& fallback) {
  if (!cfg.has(key)) return fallback;
  const auto parts = split(cfg.get(key, ""), ',');
  if (parts.size() != 6) throw Error(ErrorCode::ParseError, key + ": expected h_lo,h_hi,s_lo,s_hi,v_lo,v_hi");
  std::array<int, 6> v{};
  for (int i = 0; i < 6; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stoi(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, key + ": '" + parts[i] + "' is not an integer");
    }
  }
  const int hmax = 179;
  if (v[0] < 0 || v[1] > hmax || v[0] > v[1] || v[2] < 0 || v[3] > 255 || v[2] > v[3] || v[4] < 0 || v[5] > 255 ||
      v[4] > v[5]) {
    throw Error(ErrorCode::ParseError, key + ": band bounds out of range or reversed");
  }
  return HsvBand{static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2]),
                 static_cast<std::uint8_t>(v[3]), static_cast<std::uint8_t>(v[4]), static_cast<std::uint8_t>(v[5])};
}

}  // namespace

Config Config::parse(const std::string& text, std::filesystem::path base_dir) {
  Config cfg;
  cfg.base_dir_ = std::move(base_dir);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool versioned = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
    if (!versioned) {
      if (key != "config_version") {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": config_version must come first");
      }
      if (value != std::to_string(kVersion)) {
        throw Error(ErrorCode::ParseError, "unsupported config_version '" + value + "'");
      }
      versioned = true;
      continue;
    }
    if (!cfg.entries_.emplace(key, Entry{value, line_no}).second) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  if (!versioned) throw Error(ErrorCode::ParseError, "missing config_version");
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void Config::bad(const std::string& key, const std::string& why) const {
  const auto it = entries_.find(key);
  const std::string where = it == entries_.end() ? "" : "line " + std::to_string(it->second.line) + ": ";
  throw Error(ErrorCode::ParseError, where + key + ": " + why);
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

std::string Config::require(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw Error(ErrorCode::ParseError, "missing required key '" + key + "'");
  return e->value;
}

double Config::get_double(const std::string& key, double fallback, double lo, double hi) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(e->value, &used);
    if (used != e->value.size()) bad(key, "trailing characters in number");
  } catch (const std::logic_error&) {
    bad(key, "'" + e->value + "' is not a number");
  }
  if (!std::isfinite(v) || v < lo || v > hi) {
    std::ostringstream os;
    os << "value " << e->value << " outside [" << lo << ", " << hi << "]";
    bad(key, os.str());
  }
  return v;
}

long long Config::get_int(const std::string& key, long long fallback, long long lo, long long hi) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  long long v = 0;
  try {
    std::size_t used = 0;
    v = std::stoll(e->value, &used);
    if (used != e->value.size()) bad(key, "trailing characters in integer");
  } catch (const std::logic_error&) {
    bad(key, "'" + e->value + "' is not an integer");
  }
  if (v < lo || v > hi) bad(key, "value " + e->value + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  bad(key, "expected true or false");
}

std::filesystem::path Config::get_path(const std::string& key, const std::filesystem::path& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::filesystem::path p(e->value);
  if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
  return p;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0}; }

void Config::check_unused() const {
  std::string unknown;
  for (const auto& [k, e] : entries_) {
    if (used_.count(k)) continue;
    unknown += (unknown.empty() ? "" : ", ") + k + " (line " + std::to_string(e.line) + ")";
  }
  if (!unknown.empty()) throw Error(ErrorCode::ParseError, "unknown config keys: " + unknown);
}

PipelineParams pipeline_params(const Config& cfg) {
  PipelineParams p;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto& bg = p.background;
  bg.components = static_cast<int>(cfg.get_int("background.components", bg.components, 1, 16));
  bg.learning_rate = static_cast<float>(cfg.get_double("background.learning_rate", bg.learning_rate, 1e-6, 1.0));
  bg.match_k = static_cast<float>(cfg.get_double("background.match_k", bg.match_k, 0.1, 10.0));
  bg.bg_weight_threshold =
      static_cast<float>(cfg.get_double("background.bg_weight_threshold", bg.bg_weight_threshold, 0.01, 0.99));
  bg.weight_new = static_cast<float>(cfg.get_double("background.weight_new", bg.weight_new, 1e-4, 0.99));
  bg.var_init = static_cast<float>(cfg.get_double("background.var_init", bg.var_init, 1e-3, 1e5));
  bg.var_min = static_cast<float>(cfg.get_double("background.var_min", bg.var_min, 1e-3, 1e5));
  bg.shadow_v_lo = static_cast<float>(cfg.get_double("shadow.v_lo", bg.shadow_v_lo, 0.0, 1.0));
  bg.shadow_v_hi = static_cast<float>(cfg.get_double("shadow.v_hi", bg.shadow_v_hi, 0.0, 1.0));
  bg.shadow_s_tol = static_cast<int>(cfg.get_int("shadow.s_tol", bg.shadow_s_tol, 0, 255));
  bg.shadow_h_tol = static_cast<int>(cfg.get_int("shadow.h_tol", bg.shadow_h_tol, 0, 90));
  bg.validate();

  p.bootstrap_frames = static_cast<std::size_t>(cfg.get_int("bootstrap_frames", 150, 1, 100000));
  p.min_roi_area = static_cast<std::size_t>(cfg.get_int("min_roi_area", 500, 1, 100000000));
  p.remove_shadows = cfg.get_bool("remove_shadows", true);

  auto& body = p.body;
  body.canny.low = static_cast<float>(cfg.get_double("body.canny_low", body.canny.low, 0.0, 1e4));
  body.canny.high = static_cast<float>(cfg.get_double("body.canny_high", body.canny.high, 0.0, 1e4));
  body.canny.sigma = static_cast<float>(cfg.get_double("body.canny_sigma", body.canny.sigma, 0.1, 10.0));
  if (body.canny.low > body.canny.high) throw Error(ErrorCode::InvalidThresholds, "body.canny_low > body.canny_high");
  body.hough.vote_threshold = static_cast<int>(cfg.get_int("body.hough_votes", body.hough.vote_threshold, 1, 100000));
  body.gate_deg = cfg.get_double("body.gate_deg", body.gate_deg, 0.0, 45.0);
  body.suppress_body_color = cfg.get_bool("body.suppress_color", body.suppress_body_color);
  body.gate_dilate_px = static_cast<int>(cfg.get_int("body.gate_dilate_px", body.gate_dilate_px, 0, 100));

  p.plate.band = parse_band(cfg, "plate.band", p.plate.band);
  p.plate.min_aspect = cfg.get_double("plate.min_aspect", p.plate.min_aspect, 0.0, kInf);
  p.plate.max_aspect = cfg.get_double("plate.max_aspect", p.plate.max_aspect, p.plate.min_aspect, kInf);
  p.plate.min_rel_area = cfg.get_double("plate.min_rel_area", p.plate.min_rel_area, 0.0, 1.0);
  p.plate.max_rel_area = cfg.get_double("plate.max_rel_area", p.plate.max_rel_area, p.plate.min_rel_area, 1.0);

  const std::string detector = cfg.get("wheel.detector", "simple");
  if (detector != "simple") throw Error(ErrorCode::ParseError, "wheel.detector: only 'simple' is available");
  p.wheel.dark_v_max = static_cast<int>(cfg.get_int("wheel.dark_v_max", p.wheel.dark_v_max, 0, 255));
  p.wheel.band_rel_height = cfg.get_double("wheel.band_rel_height", p.wheel.band_rel_height, 0.0, 1.0);
  p.wheel.min_fill = cfg.get_double("wheel.min_fill", p.wheel.min_fill, 0.0, 1.0);

  p.c_dist_px = cfg.get_double("keys.c_dist_px", p.c_dist_px, 1e-6, 1e6);
  if (cfg.has("keys.orientation")) p.orientation = parse_key_orientation(cfg.get("keys.orientation", ""));
  return p;
}

synth::SuiteConfig suite_config(const Config& cfg) {
  synth::SuiteConfig s;
  s.pipeline = pipeline_params(cfg);
  if (!cfg.has("min_roi_area")) s.pipeline.min_roi_area = 200;
  s.model_id = cfg.get("model_id", s.model_id);
  s.detection_noise_px = cfg.get_double("detection_noise_px", 0.0, 0.0, 100.0);
  s.pixel_noise_sigma = cfg.get_double("pixel_noise_sigma", 0.0, 0.0, 255.0);
  s.corner_match_px = cfg.get_double("corner_match_px", s.corner_match_px, 0.0, 1000.0);
  s.calibration_inlier_px = cfg.get_double("calibration_inlier_px", s.calibration_inlier_px, 1e-6, 1000.0);

  auto& cam = s.camera;
  cam.focal_px = cfg.get_double("camera.focal_px", cam.focal_px, 1.0, 1e6);
  cam.width = static_cast<int>(cfg.get_int("camera.width", cam.width, 16, 16384));
  cam.height = static_cast<int>(cfg.get_int("camera.height", cam.height, 16, 16384));
  cam.position.x = cfg.get_double("camera.x_mm", cam.position.x, -1e6, 1e6);
  cam.position.y = cfg.get_double("camera.y_mm", cam.position.y, -1e6, 1e6);
  cam.position.z = cfg.get_double("camera.z_mm", cam.position.z, 1.0, 1e6);
  cam.pitch_deg = cfg.get_double("camera.pitch_deg", cam.pitch_deg, 1.0, 89.0);

  if (cfg.has("poses")) {
    const auto ids = split(cfg.get("poses", ""), ',');
    std::vector<synth::SuitePose> kept;
    for (const auto& id : ids) {
      const auto it = std::find_if(s.poses.begin(), s.poses.end(), [&](const auto& p) { return p.id == id; });
      if (it == s.poses.end() && !cfg.has("pose." + id)) {
        throw Error(ErrorCode::ParseError, "poses: unknown pose id '" + id + "'");
      }
      if (it != s.poses.end()) kept.push_back(*it);
    }
    s.poses = std::move(kept);
  }
  for (const auto& key : cfg.keys_with_prefix("pose.")) {
    const std::string id = key.substr(5);
    std::istringstream in(cfg.get(key, ""));
    synth::SuitePose p{id, {}, 0.0};
    std::string rest;
    if (!(in >> p.center.x >> p.center.y >> p.heading_deg) || (in >> rest)) {
      throw Error(ErrorCode::ParseError, key + ": expected 'x_mm y_mm heading_deg'");
    }
    const auto it = std::find_if(s.poses.begin(), s.poses.end(), [&](const auto& q) { return q.id == id; });
    if (it != s.poses.end()) {
      *it = p;
    } else {
      s.poses.push_back(p);
    }
  }
  if (s.poses.empty()) throw Error(ErrorCode::ParseError, "suite has no poses");

  auto& t = s.thresholds;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  t.max_pos_mm = cfg.get_double("threshold.max_pos_mm", t.max_pos_mm, 0.0, kInf);
  t.max_pos_pct = cfg.get_double("threshold.max_pos_pct", t.max_pos_pct, 0.0, kInf);
  t.max_angle_deg = cfg.get_double("threshold.max_angle_deg", t.max_angle_deg, 0.0, 180.0);
  if (cfg.has("threshold.min_passing")) {
    t.min_passing = static_cast<std::size_t>(cfg.get_int("threshold.min_passing", 0, 0, 1000000));
  }
  return s;
}

std::vector<std::filesystem::path> expand_frame_glob(const std::string& pattern,
                                                     const std::filesystem::path& base_dir) {
  std::filesystem::path full(pattern);
  if (full.is_relative() && !base_dir.empty()) full = base_dir / full;
  std::filesystem::path dir = full.parent_path();
  if (dir.empty()) dir = ".";
  const std::string leaf = full.filename().string();
  if (dir.string().find_first_of("*?[") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "only the last path component of a frame glob may have wildcards");
  }
  std::error_code ec;
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    if (fnmatch(leaf.c_str(), entry.path().filename().c_str(), 0) == 0) out.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace monolocal
