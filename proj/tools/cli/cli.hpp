#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hyperpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitNumerical = 4;

/// Runs one command line (without the program name). Structured results go
/// to `out`, diagnostics to `err`. Returns the process exit code.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace hyperpc::cli
