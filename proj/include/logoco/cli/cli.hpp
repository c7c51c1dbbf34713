#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logoco::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  /// Invalid configuration or input data.
  kInvalid = 1,
  /// Unknown subcommand or flag.
  kUsage = 2,
  /// I/O, detector or transport failure during the run.
  kFailed = 3,
};

/// Entry point behind the `logoco` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace logoco::cli
