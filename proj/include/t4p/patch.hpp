#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace t4p {

struct Hunk {
  std::size_t old_start = 0;
  std::size_t old_count = 0;
  std::size_t new_start = 0;
  std::size_t new_count = 0;
  /// Each line keeps its ' ', '-' or '+' marker as the first character.
  std::vector<std::string> lines;
  bool old_missing_newline = false;
  bool new_missing_newline = false;
};

struct FilePatch {
  /// Paths with git's a/ and b/ prefixes removed; "/dev/null" marks
  /// creation or deletion.
  std::string old_path;
  std::string new_path;
  std::vector<Hunk> hunks;

  bool creates() const { return old_path == "/dev/null"; }
  bool deletes() const { return new_path == "/dev/null"; }
};

/// Throws PatchError on malformed input.
std::vector<FilePatch> parse_unified_diff(std::string_view text);

/// Applies every file patch under `root`. Context must match exactly at the
/// stated line numbers (no fuzz, no offset search). All files are checked
/// before any is written, so a failing patch leaves the tree untouched.
void apply_patch(const std::filesystem::path& root, std::string_view diff_text);

}  // namespace t4p
