#pragma once

#include <ostream>

namespace cits {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarms = 2;
inline constexpr int kExitUnreadable = 3;

/// Entry point of `cits-sim`. Subcommands: validate, run, attack-paths.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cits
