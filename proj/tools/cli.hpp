#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fgdim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitValidation = 3,
  kExitResource = 4,
};

/// Runs the tool on `args` (without the program name). Data goes to files or
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace fgdim::cli
