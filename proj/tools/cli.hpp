#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace dwalign::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalError = 3,
};

// Runs one subcommand. `args` excludes the program name. Diagnostics go to
// `err`, machine-readable results to `out`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dwalign::cli
