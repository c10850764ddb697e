#include "monolocal/pipeline.hpp"

#include <chrono>

#include "monolocal/random.hpp"

namespace monolocal {

namespace {

Point2 jitter(Point2 p, const DetectionNoise& noise) {
  if (noise.sigma_px <= 0.0 || !noise.rng) return p;
  const double dx = noise.sigma_px * standard_normal(*noise.rng);
  const double dy = noise.sigma_px * standard_normal(*noise.rng);
  return {p.x + dx, p.y + dy};
}

LineRT jitter_segment(const LineRT& line, Point2 a, Point2 b, const DetectionNoise& noise) {
  const Point2 ja = jitter(a, noise), jb = jitter(b, noise);
  if (norm(jb - ja) < 1e-9) return line;
  return LineRT::through(ja, jb - ja, line.votes);
}

void jitter_lines(FootprintLines& lines, const DetectionNoise& noise) {
  const auto c = lines.corners();
  if (!c) return;
  const auto [a, b, cc, d] = *c;
  lines.l_F = jitter_segment(lines.l_F, a, b, noise);
  lines.opp_S = jitter_segment(lines.opp_S, b, cc, noise);
  lines.opp_F = jitter_segment(lines.opp_F, cc, d, noise);
  lines.l_S = jitter_segment(lines.l_S, d, a, noise);
}

// Largest 8-connected blob of `mask` inside `box`, as a box-sized mask.
RasterImage largest_blob(const RasterImage& mask, const RoiBox& box) {
  const LabeledBlobs lb = label_components(crop(mask, box));
  const Blob* best = nullptr;
  for (const auto& b : lb.blobs) {
    if (!best || b.area > best->area) best = &b;
  }
  RasterImage out(box.w, box.h, 1);
  if (!best) return out;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      if (lb.labels.at(x, y) == best->label) out.at(x, y) = 255;
    }
  }
  return out;
}

std::vector<LineRT> or_expected(std::vector<LineRT> found, double theta) {
  if (found.empty()) found.push_back(LineRT::from_normal(theta, 0.0));
  return found;
}

FrameResult fail(FrameStatus status, std::string detail, std::optional<RoiBox> roi = {}) {
  FrameResult r;
  r.status = status;
  r.detail = std::move(detail);
  r.roi = roi;
  return r;
}

}  // namespace

std::string_view to_string(FrameStatus s) {
  switch (s) {
    case FrameStatus::Ok: return "ok";
    case FrameStatus::Bootstrap: return "bootstrap";
    case FrameStatus::NoVehicle: return "no_vehicle";
    case FrameStatus::ClassifierError: return "classifier_error";
    case FrameStatus::NoAnchor: return "no_anchor";
    case FrameStatus::Error: return "error";
  }
  return "error";
}

FrameResult locate_vehicle(const RasterImage& frame, const RasterImage& foreground, const Homography& h,
                           const SpecDatabase& db, Classifier& classifier, const PipelineParams& params,
                           const ClassifyContext& ctx, const DetectionNoise& noise) {
  const auto roi = extract_roi(foreground, params.min_roi_area);
  if (!roi) return fail(FrameStatus::NoVehicle, {});
  const RasterImage roi_img = crop(frame, *roi);
  const RasterImage roi_mask = largest_blob(foreground, *roi);
  const Point2 offset{static_cast<double>(roi->x), static_cast<double>(roi->y)};

  DimensionEstimate dims;
  try {
    const Prediction pred = classifier.classify(roi_img, ctx);
    pred.validate();
    const auto source = classifier.source() == "sidecar"  ? DimensionSource::Sidecar
                        : classifier.source() == "mock"   ? DimensionSource::Mock
                                                          : DimensionSource::GroundTruthOverride;
    dims = estimate_dimensions(pred, db, source);
  } catch (const Error& e) {
    return fail(FrameStatus::ClassifierError, e.what(), roi);
  }

  try {
    auto plate = detect_plate(roi_img, params.plate);
    std::optional<double> hint;
    if (plate) hint = plate->lower.theta;
    const auto [theta_w, theta_s] = expected_directions(roi_mask, h, offset, hint);
    const BodyLines body = extract_body_lines(roi_img, theta_w, theta_s, params.body, &roi_mask);
    FootprintLines lines = synthesize_footprint_lines(or_expected(body.width, theta_w),
                                                      or_expected(body.side, theta_s), roi_mask);
    lines = refine_footprint_lines(lines, roi_mask);

    std::optional<WheelDetection> wheels;
    if (!plate) wheels = detect_wheels(roi_img, lines.l_S, params.wheel);

    jitter_lines(lines, noise);
    if (plate) plate->P = jitter(plate->P, noise);
    if (wheels) {
      for (auto& c : wheels->contacts) c = lines.l_S.closest_point(jitter(c, noise));
      wheels->Q = 0.5 * (wheels->contacts[0] + wheels->contacts[1]);
    }

    FrameResult r;
    r.roi = roi;
    FootprintKeys keys;
    try {
      Eigen::Matrix3d shift = Eigen::Matrix3d::Identity();
      shift(0, 2) = -offset.x;
      shift(1, 2) = -offset.y;
      const Homography roi_h = Homography::from_matrix(shift * h.matrix());
      keys = select_keys(lines, plate, wheels, params.c_dist_px, params.orientation, &roi_h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoAnchor) throw;
      return fail(FrameStatus::NoAnchor, e.what(), roi);
    }
    keys = keys.translated(offset);
    r.keys = keys;
    if (plate) r.plate_box = RoiBox{plate->bbox.x + roi->x, plate->bbox.y + roi->y, plate->bbox.w, plate->bbox.h};
    r.pose = compose_pose(keys, h, dims.spec);
    r.status = FrameStatus::Ok;
    return r;
  } catch (const Error& e) {
    return fail(FrameStatus::Error, e.what(), roi);
  }
}

FramePipeline::FramePipeline(Homography h, const SpecDatabase& db, Classifier& classifier, PipelineParams params)
    : h_(std::move(h)), db_(&db), classifier_(&classifier), params_(std::move(params)), acc_(params_.background) {
  if (params_.bootstrap_frames < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap_frames must be >= 1");
}

void FramePipeline::set_background(BackgroundModel model) { model_ = std::move(model); }

FrameResult FramePipeline::process(const RasterImage& frame, const ClassifyContext& ctx,
                                   const DetectionNoise& noise) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  if (!model_) {
    try {
      acc_.add(frame);
    } catch (const Error& e) {
      return fail(FrameStatus::Error, e.what());
    }
    if (acc_.count() >= params_.bootstrap_frames) model_ = acc_.finish();
    FrameResult r = fail(FrameStatus::Bootstrap, {});
    r.elapsed_ms = elapsed();
    return r;
  }
  FrameResult r;
  try {
    RasterImage fg = model_->segment(frame);
    if (params_.remove_shadows) fg = remove_shadow(frame, fg, *model_);
    r = locate_vehicle(frame, fg, h_, *db_, *classifier_, params_, ctx, noise);
  } catch (const Error& e) {
    r = fail(FrameStatus::Error, e.what());
  }
  r.elapsed_ms = elapsed();
  return r;
}

}  // namespace monolocal
