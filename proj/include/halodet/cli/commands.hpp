#pragma once

#include <string>
#include <vector>

namespace halodet::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 2 usage/input error, 3 backend error,
// 4 infeasible constraint, 1 anything else.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitInfeasible = 4;

// Runs the full command surface; args excludes the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace halodet::cli
