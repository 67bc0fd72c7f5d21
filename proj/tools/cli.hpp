#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ebsim::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kRuntimeError = 4;

// Runs the command line (args excludes the program name). Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebsim::cli
