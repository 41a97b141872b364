#pragma once

#include <iosfwd>

namespace kamsep {

enum ExitCode : int { kOk = 0, kUsage = 1, kIoFailure = 2, kNumericFailure = 3 };

// Entry point of the kamsep command line tool; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace kamsep
