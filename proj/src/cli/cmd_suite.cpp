#include <chrono>
#include <fstream>
#include <limits>
#include <ostream>

#include "commands.hpp"
#include "monolocal/cli.hpp"
#include "monolocal/synth.hpp"

namespace monolocal::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace

int cmd_suite(const SuiteOptions& opt, std::ostream& out, std::ostream& err) {
  synth::SuiteConfig suite;
  SpecDatabase db;
  std::uint64_t seed = 0;
  try {
    const Config cfg = opt.config ? Config::load(*opt.config) : Config::parse("config_version = 1\n");
    suite = synth::SuiteConfig(suite_config(cfg));
    const auto db_path = cfg.get_path("spec_db");
    db = db_path.empty() ? SpecDatabase::load_default() : SpecDatabase::load(db_path);
    db.at(suite.model_id);
    const auto cfg_seed = cfg.get_int("seed", 0, 0, std::numeric_limits<long long>::max());
    seed = opt.seed ? *opt.seed : static_cast<std::uint64_t>(cfg_seed);
    cfg.check_unused();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const synth::SuiteReport report = synth::run_suite(suite, db, seed);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string text = synth::format_text(report);
  try {
    std::filesystem::create_directories(opt.out_dir);
    write_text(opt.out_dir / "suite_report.csv", synth::format_csv(report));
    write_text(opt.out_dir / "suite_report.txt", text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  out << text;
  if (opt.timing) err << "suite wall time " << seconds << " s\n";
  return report.meets(suite.thresholds) ? kOk : kSuiteThresholds;
}

}  // namespace monolocal::cli
