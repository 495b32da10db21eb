#pragma once

// Command-line front end. Exit codes: 0 pass, 1 verification failure,
// 2 input error, 3 unsupported request.

#include <iosfwd>
#include <string>
#include <vector>

#include "solvkit/error.hpp"

namespace solvkit {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitUnsupported = 3;

int exit_code_for(ErrorKind kind);

/// Runs one invocation; `args` excludes the program name. SOLVKIT_BACKEND
/// (rational|float) is read from the environment.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace solvkit
