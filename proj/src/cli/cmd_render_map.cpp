#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "commands.hpp"
#include "monolocal/calibration.hpp"
#include "monolocal/cli.hpp"
#include "monolocal/pnm.hpp"
#include "monolocal/synth.hpp"

namespace monolocal::cli {

namespace {

std::vector<double> numbers(const std::string& s, std::size_t n, const char* what) {
  std::vector<double> v;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + ": '" + part + "' is not a number");
    }
  }
  if (v.size() != n) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": expected " + std::to_string(n) + " numbers");
  return v;
}

}  // namespace

int cmd_render_map(const RenderMapOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const auto e = numbers(opt.extent, 4, "--extent");
    if (!(e[2] > e[0] && e[3] > e[1]) || !(opt.scale > 0.0)) {
      err << "error: extent must be non-empty and scale > 0\n";
      return kUsage;
    }
    const CalibrationResult calib = read_calibration(opt.calibration);
    const RasterImage frame = pnm::read(opt.frame);
    const RasterImage map = render_ground_map(frame, calib.homography, WorldRect{e[0], e[1], e[2], e[3]}, opt.scale);
    pnm::write(opt.out, map);
    out << "wrote " << opt.out.string() << " (" << map.width() << "x" << map.height() << ")\n";
    return kOk;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }
}

int cmd_render_scene(const RenderSceneOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    synth::SceneSpec scene;
    scene.pixel_noise_sigma = opt.pixel_noise;
    std::vector<std::string> tags;
    if (opt.pose) {
      const auto p = numbers(*opt.pose, 3, "--pose");
      const SpecDatabase db = SpecDatabase::load_default();
      scene.vehicle = synth::SceneVehicle{db.at(opt.model_id), {p[0], p[1]}, p[2]};
      tags.push_back("fixture=" + opt.model_id);
    }
    const synth::Rendered r = synth::render(scene, opt.seed);
    pnm::write(opt.out, r.frame, tags);
    if (opt.correspondences) {
      std::ofstream f(*opt.correspondences);
      if (!f) throw Error(ErrorCode::IoError, "cannot write " + opt.correspondences->string());
      f << "# world_x_mm world_y_mm image_x_px image_y_px\n";
      char line[128];
      for (const auto& c : r.truth.marker_corners) {
        std::snprintf(line, sizeof line, "%.3f %.3f %.6f %.6f\n", c.world.x, c.world.y, c.image.x, c.image.y);
        f << line;
      }
    }
    out << "wrote " << opt.out.string() << "\n";
    return kOk;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }
}

}  // namespace monolocal::cli
