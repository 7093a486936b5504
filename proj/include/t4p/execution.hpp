#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "t4p/grammar.hpp"
#include "t4p/oracle.hpp"
#include "t4p/registry.hpp"

namespace t4p {

enum class Variant { kBuggy, kFixed };

const char* to_string(Variant variant);
Variant variant_from_string(std::string_view text);

inline constexpr const char* kMarkerFile = ".t4p";
inline constexpr const char* kCompileLog = "t4p_compile.log";

/// A checked-out copy of one bug variant. The root holds a `.t4p` marker
/// recording (project, bug_id, variant).
struct Workspace {
  BugEntry bug;
  Variant variant = Variant::kBuggy;
  std::filesystem::path root;
  bool compiled = false;
};

struct WorkspaceMarker {
  std::string project;
  int bug_id = 0;
  Variant variant = Variant::kBuggy;
  bool compiled = false;
  /// Registry root the workspace was checked out from.
  std::string home;
};

std::optional<WorkspaceMarker> read_marker(const std::filesystem::path& dir);
void write_marker(const Workspace& ws);

/// Copies the buggy source tree to `dest` and, for FIXED, applies the
/// bug's patch. `dest` must be absent, empty, or a workspace of the same
/// bug (which is then replaced). On any failure no marker is left behind.
Workspace checkout(const BugEntry& bug, Variant variant, const std::filesystem::path& dest);

/// Rebuilds a Workspace from the marker in `dir`.
Workspace open_workspace(const Registry& registry, const std::filesystem::path& dir);

struct CompileStatus {
  bool compiled = false;
  std::size_t commands_run = 0;
  std::filesystem::path log;
};

/// Runs compile_cmds in order inside the workspace; throws CompileError at
/// the first nonzero exit.
CompileStatus compile(Workspace& ws);

/// Runs harness_cmd ++ tokens in the workspace with the bug's environment
/// and timeout. `cwd_override` redirects execution to a scratch copy.
RunObservation run_system_test(const Workspace& ws, const std::vector<std::string>& tokens,
                               const std::optional<std::filesystem::path>& cwd_override = std::nullopt);

/// Runs reference_cmd ++ tokens; nullopt on timeout.
std::optional<ReferenceOutput> run_reference(const Workspace& ws, const std::vector<std::string>& tokens,
                                             const std::optional<std::filesystem::path>& cwd_override = std::nullopt);

/// Grammars and oracle of a bug, parsed once.
struct BugAssets {
  Grammar grammar;
  std::optional<Grammar> failing_grammar;
  std::optional<Grammar> passing_grammar;
  OracleSpec oracle;
};

BugAssets load_bug_assets(const BugEntry& bug);

/// One system test to run. `input` is the command-line string checked
/// against the grammar; `tokens` is what the harness receives.
struct SystemTestCase {
  std::string name;
  std::vector<std::string> tokens;
  std::string input;
  std::optional<Label> expected;
  /// Set when the case could not even be prepared (e.g. unreadable file).
  std::optional<std::string> error;
};

/// Regular files of `dir` in index order (t4p_systemtest_<i>_<label> first,
/// ordered by i, then any others by name). tests.jsonl is skipped.
std::vector<SystemTestCase> cases_from_directory(const std::filesystem::path& dir);
std::vector<SystemTestCase> cases_from_records(const std::vector<TestCaseRecord>& records);

struct Judgement {
  RunObservation observation;
  FeatureMap features;
  std::optional<ReferenceOutput> reference;
  TestResult result = TestResult::kUndefined;
  std::optional<std::string> error;
};

/// Parse, run, optionally run the reference, evaluate. Input that does not
/// parse under the bug grammar yields UNDEFINED with an error and is not run.
Judgement judge(const Workspace& ws, const BugAssets& assets, const std::vector<std::string>& tokens,
                const std::string& input,
                const std::optional<std::filesystem::path>& cwd_override = std::nullopt);

struct ReportEntry {
  std::string name;
  std::vector<std::string> tokens;
  TestResult result = TestResult::kUndefined;
  std::optional<Label> expected;
  std::optional<bool> match;
  long long duration_ms = 0;
  std::optional<std::string> error;
};

struct TestReport {
  std::string project;
  int bug_id = 0;
  Variant variant = Variant::kBuggy;
  std::vector<ReportEntry> entries;

  std::map<TestResult, std::size_t> totals() const;
  std::size_t count(TestResult result) const;
  bool all_match() const;
};

nlohmann::json report_to_json(const TestReport& report);
/// Throws Error(kParse) if totals disagree with the entries.
TestReport report_from_json(const nlohmann::json& doc);
void write_report(const TestReport& report, const std::filesystem::path& path);

/// Equality ignoring durations.
bool same_outcomes(const TestReport& a, const TestReport& b);

struct RunOptions {
  /// Tests run concurrently up to this width, each in a private scratch
  /// copy of the workspace. Entry order always follows input order.
  std::size_t jobs = 1;
};

TestReport test_system_set(const Workspace& ws, const std::vector<SystemTestCase>& tests,
                           const RunOptions& options = {});

/// What generation and verification need to execute candidates: a compiled
/// BUGGY workspace of the bug.
struct ExecutionContext {
  const Workspace* buggy = nullptr;
};

}  // namespace t4p
