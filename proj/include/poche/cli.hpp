#pragma once

#include <ostream>

namespace poche::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point for the `poche` tool. Results go to `out`, diagnostics and
/// usage text to `err`. Returns 0 on success, 1 for usage errors and 2 for
/// data errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace poche::cli
