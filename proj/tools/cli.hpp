#pragma once

#include <iosfwd>

namespace irmkit::cli {

/// Exit codes of every subcommand.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kValidationError = 2,
  kNumericError = 3,
};

/// Runs the command line `argv` (argv[0] is the program name). Normal output
/// goes to `out`; failures are reported on `err` as a JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace irmkit::cli
