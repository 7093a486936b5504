#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace t4p {

enum class Label { kPassing, kFailing };

const char* to_string(Label label);
Label label_from_string(std::string_view text);

enum class LabelingMode { kGrammar, kOracleFilter };

const char* to_string(LabelingMode mode);

using Argv = std::vector<std::string>;

/// One bug of the benchmark. Path fields are relative to the registry root,
/// which is carried alongside so the entry can resolve them on its own.
struct BugEntry {
  std::string project;
  int bug_id = 0;
  std::string description;
  std::string source_dir;
  std::string patch_file;
  std::vector<Argv> compile_cmds;
  Argv harness_cmd;
  Argv unit_runner_cmd;
  std::string grammar_file;
  std::optional<std::string> failing_grammar_file;
  std::optional<std::string> passing_grammar_file;
  LabelingMode labeling_mode = LabelingMode::kGrammar;
  std::string oracle_file;
  std::optional<Argv> reference_cmd;
  std::string curated_tests_file;
  std::string unit_template_file;
  int timeout_ms = 10000;
  std::map<std::string, std::string> env;

  /// Registry root; not part of the descriptor.
  std::filesystem::path root;

  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
  std::string id() const { return project + "_" + std::to_string(bug_id); }

  friend bool operator==(const BugEntry&, const BugEntry&) = default;
};

struct TestCaseRecord {
  std::vector<std::string> tokens;
  Label label = Label::kPassing;

  friend bool operator==(const TestCaseRecord&, const TestCaseRecord&) = default;
};

/// Descriptor JSON. from_json throws Error(kParse) naming the offending field.
nlohmann::json bug_to_json(const BugEntry& bug);
BugEntry bug_from_json(const nlohmann::json& doc);

std::vector<TestCaseRecord> parse_test_records(std::string_view jsonl, const std::string& origin);
std::vector<TestCaseRecord> load_test_records(const std::filesystem::path& path);
std::string format_test_records(const std::vector<TestCaseRecord>& records);

struct CuratedCounts {
  std::size_t passing = 0;
  std::size_t failing = 0;
};

/// Immutable after load; safe to share between threads for reading.
class Registry {
 public:
  Registry() = default;
  explicit Registry(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }
  /// Sorted by (project, bug_id).
  const std::vector<BugEntry>& bugs() const noexcept { return bugs_; }
  std::vector<std::string> projects() const;
  CuratedCounts curated_counts(const BugEntry& bug) const;

  /// Throws Error(kConflict) on a duplicate (project, bug_id).
  void add(BugEntry bug, CuratedCounts counts);

 private:
  std::filesystem::path root_;
  std::vector<BugEntry> bugs_;
  std::map<std::pair<std::string, int>, CuratedCounts> counts_;
};

Registry load_registry(const std::filesystem::path& root);

/// Exact, case-sensitive lookup. Throws Error(kNotFound) listing the
/// project's available ids (or the available projects).
const BugEntry& get_bug(const Registry& registry, std::string_view project, int bug_id);

/// Human-readable listing, projects and bugs in ascending order.
std::string summarize(const Registry& registry);

/// Details of one bug, as printed by `info -p P -i I`.
std::string describe(const Registry& registry, const BugEntry& bug);

}  // namespace t4p
