#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace subalign::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

// Runs `subalign <args...>` (program name excluded) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace subalign::cli
