#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace monolocal::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kCalibrationFailed = 2,
  kSuiteThresholds = 3,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace monolocal::cli
