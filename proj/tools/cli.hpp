#pragma once

#include <ostream>

namespace rosa::cli {

/// Entry point shared by the `rosa` binary and the CLI tests.
/// Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rosa::cli
