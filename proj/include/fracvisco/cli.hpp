#pragma once

#include <iosfwd>

namespace fracvisco::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Runs one subcommand (ingest, analyze, simulate, fit, report). Progress
/// and diagnostics go to `err`, help text to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace fracvisco::cli
