#pragma once

#include <iosfwd>

namespace swpass {

/// Exit codes: 0 success, 1 validation or usage error, 2 numerical failure.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace swpass
