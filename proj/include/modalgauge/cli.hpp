#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modalgauge::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kInputError = 1, kPartialFailure = 2 };

/// Runs the command line (arguments without the program name). Normal
/// output goes to `out`; diagnostics go to `err`, one line each, errors
/// prefixed `error:`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modalgauge::cli
