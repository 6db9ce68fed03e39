#pragma once

#include <iosfwd>

namespace fdwd::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kValidation = 3,
    kSolver = 4,
};

// Entry point behind the fdwd executable: fit | predict | cv | simulate |
// benchmark | plot-loss.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdwd::cli
