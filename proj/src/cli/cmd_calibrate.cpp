#include <cstdio>
#include <ostream>

#include "commands.hpp"
#include "monolocal/calibration.hpp"
#include "monolocal/cli.hpp"
#include "monolocal/pnm.hpp"

namespace monolocal::cli {

int cmd_calibrate(const CalibrateOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<Correspondence> corrs;
  try {
    corrs = read_correspondences(opt.correspondences);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (!opt.no_detect) {
    RasterImage frame;
    try {
      frame = pnm::read(opt.frame);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
    const auto corners = detect_marker_corners(frame);
    const std::size_t listed = corrs.size();
    corrs = snap_to_corners(corrs, corners, opt.snap_px);
    out << "detected " << corners.size() << " corners, matched " << corrs.size() << " of " << listed << "\n";
  } else if (!std::filesystem::exists(opt.frame)) {
    err << "error: cannot open " << opt.frame.string() << "\n";
    return kUsage;
  }

  try {
    const CalibrationResult result = calibrate(corrs, opt.inlier_px, opt.seed);
    write_calibration(opt.out, result);
    char line[128];
    std::snprintf(line, sizeof line, "inliers=%zu rms_px=%.4f rms_mm=%.2f\n", result.inliers, result.rms_reproj_px,
                  result.rms_world_mm);
    out << line;
    return kOk;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::InsufficientData:
        err << "error: insufficient correspondences (" << corrs.size() << ", need 4)\n";
        return kCalibrationFailed;
      case ErrorCode::NoConsensus:
      case ErrorCode::DegenerateConfiguration:
        err << "error: calibration failed: " << e.what() << "\n";
        return kCalibrationFailed;
      default:
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
  }
}

}  // namespace monolocal::cli
