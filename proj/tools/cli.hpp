#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fdreg::cli {

// Parses and executes one command-line invocation (without the program name)
// and returns the process exit code: 0 success, 1 usage error, 2 data/load
// error, 3 numeric failure. All diagnostics go to `err`, results to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdreg::cli
