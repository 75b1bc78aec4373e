#pragma once

#include <iosfwd>

namespace fbgvib {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the fbgvib executable. Diagnostics go to `err` as a
// single line; summaries go to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbgvib
