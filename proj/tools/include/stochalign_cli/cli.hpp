#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stochalign::cli {

enum ExitCode : int { Ok = 0, Usage = 1, InputError = 2, BudgetExceeded = 3 };

/// Runs one command line (argv[0] is the program name). Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stochalign::cli
