#pragma once

// Command-line driver. Subcommands: run, bench, convert, reorder, inspect.
// Exit codes: 0 success, 1 parse error, 2 semantic or usage error, 3 I/O
// error, 4 runtime error.

#include <ostream>
#include <string>
#include <vector>

namespace sparta::cli {

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparta::cli
