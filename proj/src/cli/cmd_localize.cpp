#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "commands.hpp"
#include "monolocal/calibration.hpp"
#include "monolocal/cli.hpp"
#include "monolocal/overlay.hpp"
#include "monolocal/pipeline.hpp"
#include "monolocal/pnm.hpp"

namespace monolocal::cli {

namespace {

constexpr double kFrameBudgetMs = 2000.0;

SidecarOptions parse_sidecar_url(std::string url, const Config& cfg) {
  SidecarOptions o;
  for (const char* scheme : {"http://"}) {
    if (url.rfind(scheme, 0) == 0) url = url.substr(std::string(scheme).size());
  }
  if (!url.empty() && url.back() == '/') url.pop_back();
  const auto colon = url.rfind(':');
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      o.port = std::stoi(url.substr(colon + 1), &used);
      if (used != url.size() - colon - 1 || o.port < 1 || o.port > 65535) throw std::out_of_range("port");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad sidecar port in '" + url + "'");
    }
    url = url.substr(0, colon);
  }
  if (url.empty()) throw Error(ErrorCode::InvalidArgument, "sidecar URL has no host");
  o.host = url;
  o.timeout = std::chrono::milliseconds(cfg.get_int("sidecar.timeout_ms", 2000, 1, 600000));
  o.top_k = static_cast<int>(cfg.get_int("sidecar.top_k", 5, 1, 1000));
  return o;
}

void load_overrides(OverrideClassifier& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open override map " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long long first = 0, last = 0;
    std::string id, rest;
    if (!(row >> first >> last >> id) || (row >> rest) || first < 0 || last < 0) {
      throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(line_no) +
                                             ": expected first_frame,last_frame,model_id");
    }
    c.add_range(static_cast<std::size_t>(first), static_cast<std::size_t>(last), id);
  }
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(const std::string& spec, const SpecDatabase& db, const Config& cfg,
                                            std::uint64_t seed) {
  const auto label_map = cfg.get_path("mock.label_map");
  const auto confusion = cfg.get_path("mock.confusion");
  if (spec == "mock") {
    auto mock = std::make_unique<MockClassifier>(db, seed);
    if (!label_map.empty()) mock->load_label_map(label_map);
    if (!confusion.empty()) mock->set_confusion(ConfusionTable::load(confusion));
    return mock;
  }
  if (spec.rfind("sidecar:", 0) == 0) {
    return std::make_unique<SidecarClassifier>(db, parse_sidecar_url(spec.substr(8), cfg));
  }
  if (spec.rfind("override:", 0) == 0) {
    auto c = std::make_unique<OverrideClassifier>(db);
    load_overrides(*c, spec.substr(9));
    return c;
  }
  throw Error(ErrorCode::InvalidArgument, "classifier must be mock, sidecar:<url> or override:<file>");
}

int cmd_localize(const LocalizeOptions& opt, std::ostream& out, std::ostream& err) {
  Config cfg;
  std::optional<Homography> h;
  SpecDatabase db;
  std::vector<std::filesystem::path> frames;
  std::filesystem::path overlay_dir;
  std::unique_ptr<Classifier> classifier;
  PipelineParams params;
  std::optional<BackgroundModel> snapshot;
  std::string fixture;
  try {
    cfg = Config::load(opt.config);
    const auto base = opt.config.parent_path();
    h = read_calibration(cfg.get_path("calibration", "")).homography;
    const auto db_path = cfg.get_path("spec_db");
    db = db_path.empty() ? SpecDatabase::load_default() : SpecDatabase::load(db_path);
    frames = expand_frame_glob(cfg.require("frames"), base);
    if (frames.empty()) throw Error(ErrorCode::InvalidArgument, "no frames match '" + cfg.get("frames", "") + "'");
    overlay_dir = cfg.get_path("output_dir", opt.out ? opt.out->parent_path() : std::filesystem::path("."));
    if (overlay_dir.empty()) overlay_dir = ".";
    const std::uint64_t seed =
        opt.seed ? *opt.seed : static_cast<std::uint64_t>(cfg.get_int("seed", 0, 0, std::numeric_limits<long long>::max()));
    const std::string which = opt.classifier ? *opt.classifier : cfg.get("classifier", "mock");
    fixture = cfg.get("mock.fixture", "");
    params = pipeline_params(cfg);
    const auto snap_path = cfg.get_path("background_model");
    if (!snap_path.empty()) snapshot = BackgroundModel::load(snap_path, params.background);
    classifier = make_classifier(which, db, cfg, seed);
    cfg.check_unused();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  std::ofstream file;
  if (opt.out) {
    file.open(*opt.out);
    if (!file) {
      err << "error: cannot write " << opt.out->string() << "\n";
      return kUsage;
    }
  }
  std::ostream& sink = opt.out ? static_cast<std::ostream&>(file) : out;
  if (opt.overlay) std::filesystem::create_directories(overlay_dir);

  FramePipeline pipeline(*h, db, *classifier, params);
  if (snapshot) pipeline.set_background(std::move(*snapshot));

  double total_ms = 0.0, max_ms = 0.0;
  std::size_t timed = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::vector<std::string> comments;
    RasterImage frame;
    try {
      frame = pnm::read(frames[i], &comments);
    } catch (const Error& e) {
      sink << status_json(i, "error", e.what()) << "\n";
      continue;
    }
    ClassifyContext ctx;
    ctx.frame_index = i;
    ctx.fixture_key = !fixture.empty() ? fixture : pnm::find_tag(comments, "fixture");
    if (ctx.fixture_key.empty()) ctx.fixture_key = frames[i].stem().string();

    const FrameResult r = pipeline.process(frame, ctx);
    if (r.status == FrameStatus::Ok) {
      sink << pose_json(i, *r.pose) << "\n";
      if (opt.overlay && r.keys) {
        pnm::write(overlay_dir / (frames[i].stem().string() + "_footprint.ppm"),
                   overlay::footprint_overlay(frame, *r.keys, r.plate_box));
      }
    } else {
      sink << status_json(i, std::string(to_string(r.status)), r.detail) << "\n";
    }
    if (opt.timing && r.status != FrameStatus::Bootstrap) {
      char line[160];
      std::snprintf(line, sizeof line, "timing frame=%zu status=%s ms=%.1f\n", i,
                    std::string(to_string(r.status)).c_str(), r.elapsed_ms);
      err << line;
      total_ms += r.elapsed_ms;
      max_ms = std::max(max_ms, r.elapsed_ms);
      ++timed;
    }
  }
  sink.flush();
  if (opt.timing && timed > 0) {
    char line[200];
    std::snprintf(line, sizeof line, "timing summary frames=%zu mean_ms=%.1f max_ms=%.1f budget_ms=%.0f %s\n", timed,
                  total_ms / timed, max_ms, kFrameBudgetMs, max_ms <= kFrameBudgetMs ? "within" : "exceeded");
    err << line;
  }
  return kOk;
}

}  // namespace monolocal::cli
