#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace refform {

// Stable exit codes.
inline constexpr int kExitOk = 0;             // success / preserving
inline constexpr int kExitInputError = 1;     // file, parse or flag errors
inline constexpr int kExitBudget = 2;         // enumeration budget exceeded
inline constexpr int kExitNotPreserving = 3;  // check found a violation
inline constexpr int kExitOracleMismatch = 4; // oracle-diff found differences

// Runs the command line (without the program name). All normal output goes
// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace refform
