#pragma once

#include <iosfwd>

namespace fedadm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: validate, solve, train, evaluate, sweep, report.
// Returns 0 on success, 1 on an invariant violation or solver failure, 2 on
// usage errors (unknown flags, missing or malformed config).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fedadm
