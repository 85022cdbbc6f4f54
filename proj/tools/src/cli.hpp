#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wienerlab {

/// Exit codes: 0 pass or vacuous, 1 fail, 2 usage, parse or input error.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wienerlab
