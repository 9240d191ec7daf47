#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sklab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitResource = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "SKLAB_OUTPUT_DIR";

/// Parses and runs one subcommand.  args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace sklab::cli
