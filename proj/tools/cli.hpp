#pragma once

#include <iosfwd>

namespace ivmed::cli {

/// Exit codes: success, bad input (usage, parse, invalid population), and
/// statistical degeneracy (weak instrument, empty cell, singular design).
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDegenerate = 3;

/// Runs the `ivmed` command line. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ivmed::cli
