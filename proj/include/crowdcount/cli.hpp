#pragma once

#include <iosfwd>

namespace crowdcount {

// Entry point behind the crowdcount binary. Exit status: 0 success,
// 2 validation/usage error, 1 runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace crowdcount
