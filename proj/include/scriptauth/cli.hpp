#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scriptauth::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kRejected = 1,
  kUsage = 2,
  kIo = 3,
  kNotConverged = 4,
  kCapacity = 5,
  kUntrained = 6,
};

/// Runs `scriptauth <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scriptauth::cli
