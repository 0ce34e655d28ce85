#pragma once

#include <iosfwd>

namespace turbsim::cli {

enum ExitCode : int {
    kSuccess = 0,
    kFailure = 1,   // operational failure or a failed statistical check
    kUsage = 2,     // argument error
};

/// Entry point for the turbsim command line. JSON results go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace turbsim::cli
