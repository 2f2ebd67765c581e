#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tmids {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitModel = 4,
};

/// Runs the `tmids` command line. Errors are reported on `err` as one JSON
/// object and mapped to an exit code; nothing is thrown.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace tmids
