#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cltcert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (program name excluded). Reports go to --output, or
/// to `out` when no output path is given; the one-line summary and any
/// warnings go to `err` in that case and to `out` otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cltcert::cli
