#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inlinerec {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kRunDirEnv = "INLINEREC_RUN_DIR";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Entry point of the `inlinerec` tool. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace inlinerec
