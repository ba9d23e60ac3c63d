#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace acps {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Runs the `acps` command line with args[0] as the program name. Data goes
/// to `out` (or to files), diagnostics to `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace acps
