#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace t4p {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTestFailures = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitEnvironment = 3;

/// Runs one command. `args` excludes the program name; relative paths and
/// the workspace marker are resolved against `cwd`. The registry root is
/// $T4P_HOME, else the home recorded in the workspace marker, else the
/// bundled default.
int run_cli(const std::vector<std::string>& args, const std::filesystem::path& cwd, std::ostream& out,
            std::ostream& err);

}  // namespace t4p
