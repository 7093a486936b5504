#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace t4p {

struct ProcessRequest {
  std::vector<std::string> argv;
  std::filesystem::path cwd;
  /// Overlaid on the parent environment.
  std::map<std::string, std::string> env;
  /// Zero disables the timeout.
  std::chrono::milliseconds timeout{0};
};

struct ProcessResult {
  /// Empty only on timeout. Signal deaths map to 128 + signal.
  std::optional<int> exit_code;
  std::string stdout_text;
  std::string stderr_text;
  std::chrono::milliseconds duration{0};
  bool timed_out = false;
};

/// Runs argv[0] (PATH lookup) in its own process group and captures both
/// streams. On timeout the whole group is killed. Throws
/// Error(kEnvironment) if the program cannot be started.
ProcessResult run_process(const ProcessRequest& request);

}  // namespace t4p
