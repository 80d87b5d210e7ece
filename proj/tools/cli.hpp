#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecpt::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDataError = 3 };

/// Runs the driver on argv-style arguments (without the program name).
/// Never throws; errors become messages on `err` and a nonzero exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecpt::cli
