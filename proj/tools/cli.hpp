#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace omx::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_numeric = 1,
    exit_usage = 2,
};

// Runs the `omx` command line. args[0] is the program name. Output that is
// not redirected with --out goes to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace omx::cli
