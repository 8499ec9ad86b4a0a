#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace outbreak::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericFailure = 3,
};

/// Runs one command line (args[0] is the program name). Progress and
/// diagnostics go to `err`; result files go to the run's output directory.
int run(std::span<const std::string> args, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace outbreak::cli
