#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spamlab {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitNoConvergence = 1, kExitConfig = 2 };

/// Runs one subcommand. args[0] is the program name. Results go to the file
/// named by --out, or to `out` when it is absent; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed 9-significant-digit rendering used for every CSV cell.
std::string format_number(double x);

}  // namespace spamlab
