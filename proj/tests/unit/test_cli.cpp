#include <sstream>

#include "doctest.h"
#include "monolocal/cli.hpp"
#include "test_support.hpp"

using namespace monolocal;
using namespace testsupport;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) v.push_back(l);
  return v;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"--bogus"}).code == cli::kUsage);
    CHECK(run({"localize"}).code == cli::kUsage);
    CHECK(run({"suite", "--seed", "abc"}).code == cli::kUsage);
  }

  TEST_CASE("calibrate exit codes") {
    TempDir dir("cli_cal");
    const auto frame = (dir / "road.ppm").string(), corr = (dir / "corr.txt").string();
    REQUIRE(run({"render-scene", "--out", frame, "--correspondences", corr}).code == cli::kOk);

    const auto ok = run({"calibrate", frame, corr, "--out", (dir / "cal.txt").string()});
    CAPTURE(ok.err);
    CHECK(ok.code == cli::kOk);
    CHECK(std::filesystem::exists(dir / "cal.txt"));
    CHECK(ok.out.find("inliers=") != std::string::npos);

    // two correspondences cannot fix a homography
    const auto all = lines_of(read_text(corr));
    write_text(dir / "two.txt", all[0] + "\n" + all[1] + "\n");
    CHECK(run({"calibrate", frame, (dir / "two.txt").string(), "--out", (dir / "x.txt").string()}).code ==
          cli::kCalibrationFailed);
    CHECK(run({"calibrate", (dir / "missing.ppm").string(), corr, "--out", (dir / "x.txt").string()}).code ==
          cli::kUsage);
  }

  TEST_CASE("localize streams one record per frame") {
    TempDir dir("cli_loc");
    const auto corr = (dir / "corr.txt").string();
    for (int i = 0; i < 3; ++i)
      REQUIRE(run({"render-scene", "--out", (dir / ("f_00" + std::to_string(i) + ".ppm")).string(), "--correspondences",
                   corr})
                  .code == cli::kOk);
    REQUIRE(run({"render-scene", "--out", (dir / "f_003.ppm").string(), "--pose", "194,4060,-2.07", "--model",
                 "test_vehicle"})
                .code == cli::kOk);
    REQUIRE(run({"render-scene", "--out", (dir / "f_004.ppm").string()}).code == cli::kOk);
    REQUIRE(run({"calibrate", (dir / "f_000.ppm").string(), corr, "--out", (dir / "cal.txt").string()}).code ==
            cli::kOk);
    write_text(dir / "loc.conf",
               "config_version = 1\ncalibration = cal.txt\nframes = f_*.ppm\noutput_dir = ov\n"
               "bootstrap_frames = 3\nmin_roi_area = 200\n");

    const auto r = run({"localize", "--config", (dir / "loc.conf").string(), "--overlay", "--timing"});
    CAPTURE(r.err);
    REQUIRE(r.code == cli::kOk);
    const auto recs = lines_of(r.out);
    REQUIRE(recs.size() == 5);
    CHECK(recs[0] == "{\"frame\": 0, \"status\": \"bootstrap\"}");
    CHECK(recs[3].find("\"model_id\": \"test_vehicle\"") != std::string::npos);
    CHECK(recs[3].find("\"anchor\": \"plate_O\"") != std::string::npos);
    CHECK(recs[4].find("\"status\": \"no_vehicle\"") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "ov" / "f_003_footprint.ppm"));
    CHECK(!std::filesystem::exists(dir / "ov" / "f_004_footprint.ppm"));
    CHECK(r.err.find("timing summary frames=2") != std::string::npos);

    write_text(dir / "bad.conf", "config_version = 1\ncalibration = cal.txt\nframes = f_*.ppm\nbogus = 1\n");
    const auto bad = run({"localize", "--config", (dir / "bad.conf").string()});
    CHECK(bad.code == cli::kUsage);
    CHECK(bad.err.find("bogus") != std::string::npos);
  }

  TEST_CASE("suite exit codes and reproducible reports") {
    TempDir dir("cli_suite");
    write_text(dir / "s.conf", "config_version = 1\nposes = M0,C0\n");
    const auto a = run({"suite", "--config", (dir / "s.conf").string(), "--out", (dir / "a").string(), "--seed", "4"});
    const auto b = run({"suite", "--config", (dir / "s.conf").string(), "--out", (dir / "b").string(), "--seed", "4"});
    CAPTURE(a.err);
    CHECK(a.code == cli::kOk);
    CHECK(b.code == cli::kOk);
    for (const char* f : {"suite_report.csv", "suite_report.txt"}) {
      CHECK(!read_text(dir / "a" / f).empty());
      CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
    }

    write_text(dir / "strict.conf", "config_version = 1\nposes = M0\nthreshold.max_pos_mm = 0.000001\n");
    CHECK(run({"suite", "--config", (dir / "strict.conf").string(), "--out", (dir / "c").string()}).code ==
          cli::kSuiteThresholds);
  }

  TEST_CASE("render-map writes a top-down view") {
    TempDir dir("cli_map");
    const auto frame = (dir / "road.ppm").string(), corr = (dir / "corr.txt").string();
    REQUIRE(run({"render-scene", "--out", frame, "--correspondences", corr}).code == cli::kOk);
    REQUIRE(run({"calibrate", frame, corr, "--out", (dir / "cal.txt").string(), "--no-detect"}).code == cli::kOk);
    CHECK(run({"render-map", "--calibration", (dir / "cal.txt").string(), "--frame", frame, "--out",
               (dir / "map.ppm").string(), "--extent", "-3000,2000,3000,14000", "--scale", "20"})
              .code == cli::kOk);
    CHECK(std::filesystem::exists(dir / "map.ppm"));
  }
}
