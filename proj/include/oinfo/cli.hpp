#pragma once

#include <string>
#include <vector>

namespace oinfo::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "OINFO_OUTPUT_DIR";

/// Entry point of the `oinfo` tool: oracle | gen | train | estimate | grad | sweep.
int run(int argc, const char* const* argv);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace oinfo::cli
