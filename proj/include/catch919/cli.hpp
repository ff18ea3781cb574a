#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace catch919 {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNoConvergence = 2;

// Runs one command line (without the program name). Results go to `out` or
// to the --out file, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace catch919
