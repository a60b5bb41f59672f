#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace demoforge {

// Runs one command-line invocation; `args` excludes the program name. Data
// goes to `out`, diagnostics to `err`. Returns the process exit code:
// 0 success, 1 input error, 2 internal error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace demoforge
