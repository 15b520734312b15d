#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nam {

/// Exit codes of namctl.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numeric = 3 };

/// Runs namctl with `args` (without the program name). Normal output goes
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace nam
