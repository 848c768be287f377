#pragma once

#include <iosfwd>

namespace arise::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv and runs one subcommand. Help and usage text go to `out` and
/// `err` respectively; summaries and diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arise::cli
