#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace t4p::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace t4p::io

namespace t4p::io {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix = "t4p");
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir();

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Relative generic paths of every file and directory below `root`.
std::vector<std::string> snapshot_tree(const std::filesystem::path& root);

void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to);

}  // namespace t4p::io
