#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heatkl {

// Exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInconsistent = 3;
inline constexpr int kExitNumeric = 4;

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heatkl
