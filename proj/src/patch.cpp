#include "t4p/patch.hpp"

#include <charconv>
#include <map>
#include <optional>

#include "io.hpp"
#include "t4p/error.hpp"

namespace t4p {
namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    if (nl == std::string_view::npos) {
      lines.push_back(text);
      break;
    }
    lines.push_back(text.substr(0, nl));
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::string header_path(std::string_view line) {
  line.remove_prefix(4);  // "--- " or "+++ "
  auto tab = line.find('\t');
  if (tab != std::string_view::npos) line = line.substr(0, tab);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  std::string path(line);
  if (path != "/dev/null" && (path.starts_with("a/") || path.starts_with("b/"))) path.erase(0, 2);
  return path;
}

std::size_t parse_number(std::string_view text, std::string_view whole) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw PatchError("", 0, "malformed hunk header: " + std::string(whole));
  }
  return value;
}

// "-l,s" or "-l" (count defaults to 1).
void parse_range(std::string_view part, std::size_t& start, std::size_t& count, std::string_view whole) {
  part.remove_prefix(1);
  auto comma = part.find(',');
  if (comma == std::string_view::npos) {
    start = parse_number(part, whole);
    count = 1;
  } else {
    start = parse_number(part.substr(0, comma), whole);
    count = parse_number(part.substr(comma + 1), whole);
  }
}

Hunk parse_hunk_header(std::string_view line) {
  // @@ -a,b +c,d @@ optional section text
  auto close = line.find(" @@", 3);
  if (!line.starts_with("@@ -") || close == std::string_view::npos) {
    throw PatchError("", 0, "malformed hunk header: " + std::string(line));
  }
  auto ranges = line.substr(3, close - 3);
  auto space = ranges.find(' ');
  if (space == std::string_view::npos || ranges[space + 1] != '+') {
    throw PatchError("", 0, "malformed hunk header: " + std::string(line));
  }
  Hunk hunk;
  parse_range(ranges.substr(0, space), hunk.old_start, hunk.old_count, line);
  parse_range(ranges.substr(space + 1), hunk.new_start, hunk.new_count, line);
  return hunk;
}

struct FileText {
  std::vector<std::string> lines;
  bool trailing_newline = true;
};

FileText split_file(const std::string& content) {
  FileText file;
  for (auto line : split_lines(content)) file.lines.emplace_back(line);
  file.trailing_newline = content.empty() || content.back() == '\n';
  return file;
}

std::string join_file(const FileText& file) {
  std::string out;
  for (std::size_t i = 0; i < file.lines.size(); ++i) {
    out += file.lines[i];
    if (i + 1 < file.lines.size() || file.trailing_newline) out += '\n';
  }
  return out;
}

void apply_hunks(FileText& file, const FilePatch& patch) {
  const std::string& name = patch.creates() ? patch.new_path : patch.old_path;
  long long delta = 0;
  for (std::size_t h = 0; h < patch.hunks.size(); ++h) {
    const Hunk& hunk = patch.hunks[h];
    std::size_t anchor = hunk.old_count == 0 ? hunk.old_start : hunk.old_start - 1;
    long long shifted = static_cast<long long>(anchor) + delta;
    if (shifted < 0 || static_cast<std::size_t>(shifted) > file.lines.size()) {
      throw PatchError(name, h + 1, name + ": hunk " + std::to_string(h + 1) + " starts beyond end of file");
    }
    auto at = static_cast<std::size_t>(shifted);
    std::vector<std::string> replacement;
    std::size_t cursor = at;
    for (const auto& line : hunk.lines) {
      char marker = line[0];
      std::string_view body = std::string_view(line).substr(1);
      if (marker == ' ' || marker == '-') {
        if (cursor >= file.lines.size() || file.lines[cursor] != body) {
          throw PatchError(name, h + 1,
                           name + ": hunk " + std::to_string(h + 1) + " context mismatch at line " +
                               std::to_string(cursor + 1));
        }
        ++cursor;
      }
      if (marker == ' ' || marker == '+') replacement.emplace_back(body);
    }
    bool reaches_end = cursor == file.lines.size();
    if (hunk.old_missing_newline && (!reaches_end || file.trailing_newline)) {
      throw PatchError(name, h + 1,
                       name + ": hunk " + std::to_string(h + 1) + " expects a missing final newline");
    }
    file.lines.erase(file.lines.begin() + static_cast<long>(at), file.lines.begin() + static_cast<long>(cursor));
    file.lines.insert(file.lines.begin() + static_cast<long>(at), replacement.begin(), replacement.end());
    if (reaches_end) file.trailing_newline = !hunk.new_missing_newline;
    delta += static_cast<long long>(hunk.new_count) - static_cast<long long>(hunk.old_count);
  }
}

}  // namespace

std::vector<FilePatch> parse_unified_diff(std::string_view text) {
  auto lines = split_lines(text);
  std::vector<FilePatch> patches;
  std::size_t i = 0;
  while (i < lines.size()) {
    std::string_view line = lines[i];
    if (!line.starts_with("--- ")) {
      ++i;  // preamble such as "diff --git" or "index" lines
      continue;
    }
    if (i + 1 >= lines.size() || !lines[i + 1].starts_with("+++ ")) {
      throw PatchError("", 0, "'---' header without matching '+++' at line " + std::to_string(i + 1));
    }
    FilePatch patch;
    patch.old_path = header_path(line);
    patch.new_path = header_path(lines[i + 1]);
    i += 2;
    while (i < lines.size() && lines[i].starts_with("@@")) {
      Hunk hunk = parse_hunk_header(lines[i]);
      ++i;
      std::size_t old_seen = 0;
      std::size_t new_seen = 0;
      char last = ' ';
      while (i < lines.size() && (old_seen < hunk.old_count || new_seen < hunk.new_count ||
                                  (i < lines.size() && lines[i].starts_with("\\")))) {
        std::string_view body = lines[i];
        if (body.starts_with("\\")) {
          if (last == '-') hunk.old_missing_newline = true;
          if (last == '+') hunk.new_missing_newline = true;
          if (last == ' ') hunk.old_missing_newline = hunk.new_missing_newline = true;
          ++i;
          continue;
        }
        char marker = body.empty() ? ' ' : body[0];
        std::string content = body.empty() ? std::string(" ") : std::string(body);
        if (marker == ' ') {
          ++old_seen;
          ++new_seen;
        } else if (marker == '-') {
          ++old_seen;
        } else if (marker == '+') {
          ++new_seen;
        } else {
          throw PatchError(patch.new_path, patch.hunks.size() + 1,
                           "unexpected line in hunk: " + std::string(body));
        }
        if (old_seen > hunk.old_count || new_seen > hunk.new_count) {
          throw PatchError(patch.new_path, patch.hunks.size() + 1, "hunk longer than its header states");
        }
        hunk.lines.push_back(std::move(content));
        last = marker;
        ++i;
      }
      if (old_seen != hunk.old_count || new_seen != hunk.new_count) {
        throw PatchError(patch.new_path, patch.hunks.size() + 1, "truncated hunk");
      }
      patch.hunks.push_back(std::move(hunk));
    }
    if (patch.hunks.empty()) throw PatchError(patch.new_path, 0, "file patch without hunks");
    patches.push_back(std::move(patch));
  }
  return patches;
}

namespace {

bool adds_to_empty(const FilePatch& patch) {
  return patch.hunks.size() == 1 && patch.hunks[0].old_start == 0 && patch.hunks[0].old_count == 0;
}

}  // namespace

void apply_patch(const fs::path& root, std::string_view diff_text) {
  auto patches = parse_unified_diff(diff_text);
  // Stage everything first; only write once every hunk has applied.
  std::map<std::string, std::optional<std::string>> staged;
  for (const auto& patch : patches) {
    if (patch.creates() && patch.deletes()) throw PatchError("/dev/null", 0, "patch both creates and deletes");
    const std::string& target = patch.creates() ? patch.new_path : patch.old_path;
    if (target.empty() || fs::path(target).is_absolute() || target.find("..") != std::string::npos) {
      throw PatchError(target, 0, "refusing path outside the tree: " + target);
    }
    FileText file;
    if (auto it = staged.find(target); it != staged.end() && it->second) {
      file = split_file(*it->second);
    } else if (!patch.creates()) {
      std::error_code ec;
      if (fs::is_regular_file(root / target, ec)) {
        file = split_file(io::read_file(root / target));
      } else if (!adds_to_empty(patch)) {
        // `diff -N` names a new file on both sides; anything else is an error.
        throw PatchError(target, 0, target + ": no such file to patch");
      }
    } else if (fs::exists(root / target)) {
      throw PatchError(target, 0, target + ": file to be created already exists");
    }
    apply_hunks(file, patch);
    if (patch.deletes()) {
      if (!file.lines.empty()) throw PatchError(target, 0, target + ": deletion leaves content behind");
      staged[target] = std::nullopt;
    } else {
      staged[patch.new_path] = join_file(file);
    }
  }
  for (const auto& [path, content] : staged) {
    if (content) {
      io::write_file(root / path, *content);
    } else {
      fs::remove(root / path);
    }
  }
}

}  // namespace t4p
