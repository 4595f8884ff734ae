#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anchorgt::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failed_check = 1;
inline constexpr int exit_usage = 2;

/// Runs the command line (args excludes the program name). Output goes to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace anchorgt::cli
