#pragma once

#include <iosfwd>

namespace spinmarket::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,    ///< bad command-line arguments
  kConfigError = 2,   ///< invalid or incomplete configuration
  kOutputError = 3,   ///< output directory exists (without --force) or cannot be written
  kRuntimeError = 4,  ///< simulation or analysis failure, including failed sweep cells
};

/// Environment variable naming a root directory for relative output paths.
inline constexpr const char* kOutputRootEnv = "SPINMARKET_OUTPUT_ROOT";

/// Entry point for the `spinmarket` tool; subcommands run, sweep,
/// sample-noise and stats.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace spinmarket::cli
